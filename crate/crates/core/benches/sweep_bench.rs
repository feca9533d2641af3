//! Benchmarks of the data-parallel verification sweeps: classification fans
//! out (net, tuple, window, order, eps) tasks; this suite compares the
//! rayon path against the sequential fallback on the same workload.
//!
//! With `--no-default-features` the parallel mode itself degrades to the
//! sequential path, so the two series coincide.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use colombeau_core::basic_space::GFExpr;
use colombeau_core::calculus::dist::DistributionRep;
use colombeau_core::calculus::grid::{BoxRegion, Grid, Window};
use colombeau_core::calculus::linop::LinOpSpec;
use colombeau_core::calculus::seminorm::SeminormSpec;
use colombeau_core::quotient::{classify, Caps, RegimeConfig};
use colombeau_core::regularization::{
    build_mollifier_net, transform_net, verify_test_object, zero_net, MollifierParams,
    TransformSpec, VerifyConfig,
};
use colombeau_core::scales::make_polynomial_pair;
use colombeau_core::sweep::ExecMode;

struct Setup {
    cfg: RegimeConfig,
    expr: Arc<GFExpr>,
}

fn setup() -> Setup {
    let domain = BoxRegion::new_1d(-4.0, 4.0);
    let grid = Grid::new(domain, 1 << 12).unwrap();
    let window = Window::new(domain, BoxRegion::new_1d(-1.4, 1.4)).unwrap();
    let eps: Vec<f64> = (2..=8).map(|k| 2f64.powi(-k)).collect();
    let params = MollifierParams::distribution_default();
    let scale = Arc::new(make_polynomial_pair(&eps).unwrap());
    let seminorms = vec![SeminormSpec::SupDerivatives { order: 0 }];
    let vc =
        VerifyConfig::standard(&grid, scale.clone(), vec![window], seminorms.clone()).unwrap();
    let mut net = build_mollifier_net(grid.clone(), &params, &eps).unwrap();
    assert!(verify_test_object(&mut net, &vc).unwrap().passed);
    let mut zero = zero_net(grid.clone(), &eps);
    assert!(verify_test_object(&mut zero, &vc).unwrap().passed);
    let mut comm = transform_net(
        &TransformSpec::Commutator {
            op: LinOpSpec::PartialDerivative { axis: 0 },
        },
        &[&net],
    )
    .unwrap();
    assert!(verify_test_object(&mut comm, &vc).unwrap().passed);
    let delta = GFExpr::iota(domain, DistributionRep::delta(grid.clone(), [0.0, 0.0]));
    let expr = GFExpr::prod(&delta, &delta).unwrap();
    let cfg = RegimeConfig {
        scale,
        test_nets: vec![Arc::new(net)],
        zero_nets: vec![Arc::new(zero), Arc::new(comm)],
        windows: vec![window],
        seminorms,
        caps: Caps {
            l_max: 2,
            k_max: 8.0,
            derivative_cap: 2,
        },
        seed: 1,
        exec: ExecMode::Parallel,
    };
    Setup { cfg, expr }
}

fn bench_classification(c: &mut Criterion) {
    let mut s = setup();
    let mut group = c.benchmark_group("classify-delta-square");
    group.sample_size(10);
    s.cfg.exec = ExecMode::Parallel;
    group.bench_function("parallel", |b| b.iter(|| classify(&s.expr, &s.cfg).unwrap()));
    s.cfg.exec = ExecMode::Sequential;
    group.bench_function("sequential", |b| {
        b.iter(|| classify(&s.expr, &s.cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_classification);
criterion_main!(benches);
