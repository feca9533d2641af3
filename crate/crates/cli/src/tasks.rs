//! Task runners: each named check builds on the core verification machinery
//! and reduces to a pass/fail verdict plus fit tables and raw curves.

use std::sync::Arc;

use colombeau_core::basic_space::GFExpr;
use colombeau_core::calculus::grid::BoxRegion;
use colombeau_core::calculus::dist::DistributionRep;
use colombeau_core::error::{Error, Result};
use colombeau_core::quotient::{classify, conjugated_config, equivalent, ideal_check, Verdict};
use colombeau_core::regularization::{verify_fourier_bounds, verify_test_object};
use colombeau_core::sheaf::{
    apply_morphism_expr, glue_exprs, glue_nets, restrict_expr, restrict_net, Cover,
    PartitionOfUnity,
};
use serde_json::json;

use crate::build::Workbench;
use crate::config::TaskBlock;

#[derive(Debug, serde::Serialize)]
pub struct TaskResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub data: serde_json::Value,
}

pub type Curves = Vec<(String, f64, f64, f64)>;

pub fn run_task(bench: &Workbench, task: &TaskBlock, curves: &mut Curves) -> Result<TaskResult> {
    match task {
        TaskBlock::Classify {
            name,
            expr,
            expect,
            slope,
        } => {
            let e = bench.parse_expr(expr)?;
            let cfg = bench.regime_config()?;
            let verdict = classify(&e, &cfg)?;
            push_verdict_curves(name, &verdict, curves);
            let mut passed = match expect.as_str() {
                "moderate" => verdict.is_moderate(),
                "negligible" => verdict.is_negligible(),
                "not-negligible" => verdict.is_moderate() && !verdict.is_negligible(),
                "moderate-not-negligible" => verdict.is_moderate() && !verdict.is_negligible(),
                "any" => true,
                other => {
                    return Err(Error::Config(format!("unknown expectation {other:?}")));
                }
            };
            let mut detail = format!("{:?}", verdict.classification);
            if let Some([center, tol]) = slope {
                match verdict.headline_slope {
                    Some(s) => {
                        if (s - center).abs() > *tol {
                            passed = false;
                        }
                        detail = format!("{detail}; slope {s:.3} (target {center} +- {tol})");
                    }
                    None => {
                        passed = false;
                        detail = format!("{detail}; no measurable slope");
                    }
                }
            }
            Ok(TaskResult {
                name: name.clone(),
                passed,
                detail,
                data: serde_json::to_value(&verdict).unwrap_or(json!({})),
            })
        }
        TaskBlock::Equivalent {
            name,
            lhs,
            rhs,
            expect,
        } => {
            let a = bench.parse_expr(lhs)?;
            let b = bench.parse_expr(rhs)?;
            let cfg = bench.regime_config()?;
            let (eq, verdict) = equivalent(&a, &b, &cfg)?;
            push_verdict_curves(name, &verdict, curves);
            Ok(TaskResult {
                name: name.clone(),
                passed: eq == *expect,
                detail: format!("equivalent = {eq}; {:?}", verdict.classification),
                data: serde_json::to_value(&verdict).unwrap_or(json!({})),
            })
        }
        TaskBlock::FourierBounds { name } => {
            let assoc = bench.scale.assoc.clone();
            let report =
                verify_fourier_bounds(&bench.grid, &bench.params, &bench.eps, assoc.as_ref())?;
            for (label, eps, xi, v) in &report.curves {
                curves.push((format!("{name}/{label}"), *eps, *xi, *v));
            }
            for (eps, sup, bound) in &report.sup_bound {
                curves.push((format!("{name}/sup"), *eps, *sup, *bound));
            }
            let mut passed = report.sup_bound_ok
                && report.evenness_defect < 1e-12
                && report.route_disagreement < 1e-8;
            let mut detail = format!(
                "sup ok = {}; evenness {:.2e}; routes {:.2e}",
                report.sup_bound_ok, report.evenness_defect, report.route_disagreement
            );
            if assoc.is_some() {
                passed = passed && report.high_freq_ok && report.near_identity_ok;
                detail = format!(
                    "{detail}; high-freq fit {:?}; near-identity lambda {:?}",
                    report.high_freq_fit, report.near_identity_lambda
                );
            } else if let Some(slope) = report.identity_defect_slope {
                passed = passed && slope >= 8.0;
                detail = format!("{detail}; identity defect slope {slope:.2}");
            }
            Ok(TaskResult {
                name: name.clone(),
                passed,
                detail,
                data: serde_json::to_value(&report).unwrap_or(json!({})),
            })
        }
        TaskBlock::ScaleAdmissibility { name, pair } => {
            let p = bench.scale_by_name(pair)?;
            let report = p.certificate().cloned().ok_or_else(|| {
                Error::Config("scale pair built without certificate".into())
            })?;
            Ok(TaskResult {
                name: name.clone(),
                passed: report.passed,
                detail: format!(
                    "{} axioms, witnesses: {}",
                    report.entries.len(),
                    report
                        .entries
                        .iter()
                        .map(|e| format!("({}) {}", e.axiom, e.witness))
                        .collect::<Vec<_>>()
                        .join("; ")
                ),
                data: serde_json::to_value(&report).unwrap_or(json!({})),
            })
        }
        TaskBlock::TestObjectAxioms { name } => {
            let mut net =
                colombeau_core::regularization::build_mollifier_net(bench.grid.clone(), &bench.params, &bench.eps)?;
            let vc = bench.verify_config()?;
            let report = verify_test_object(&mut net, &vc)?;
            for (label, eps, v) in &report.curves {
                curves.push((format!("{name}/{label}"), *eps, *v, 0.0));
            }
            let detail = format!(
                "growth {} / convergence {} / weak {}; {}",
                report.growth_ok,
                report.convergence_ok,
                report.weak_ok,
                report
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| format!("{}: {}", c.probe, c.detail))
                    .collect::<Vec<_>>()
                    .join("; ")
            );
            Ok(TaskResult {
                name: name.clone(),
                passed: report.passed,
                detail,
                data: serde_json::to_value(&report).unwrap_or(json!({})),
            })
        }
        TaskBlock::SheafSuite { name, cover } => run_sheaf_suite(bench, name, cover, curves),
        TaskBlock::DiffeoInvariance { name, map, exprs } => {
            let (d, stretch) = bench.parse_diffeo(map)?;
            let d = Arc::new(d);
            let cfg = bench.regime_config()?;
            let conj_cfg = conjugated_config(&cfg, &d, stretch)?;
            let mut all = true;
            let mut details = Vec::new();
            for block in exprs {
                let e = bench.parse_expr(block)?;
                let base = classify(&e, &cfg)?;
                let pushed = GFExpr::pushforward(d.clone(), stretch, &e);
                let moved = classify(&pushed, &conj_cfg)?;
                let same = base.is_negligible() == moved.is_negligible()
                    && base.is_moderate() == moved.is_moderate();
                all &= same;
                details.push(format!(
                    "{}: {:?} -> {:?} ({})",
                    e.describe(),
                    base.classification,
                    moved.classification,
                    if same { "invariant" } else { "CHANGED" }
                ));
                push_verdict_curves(&format!("{name}/{}", e.describe()), &moved, curves);
            }
            Ok(TaskResult {
                name: name.clone(),
                passed: all,
                detail: details.join("; "),
                data: json!({ "cases": details }),
            })
        }
        TaskBlock::IdealCheck {
            name,
            moderate,
            negligible,
        } => {
            let cfg = bench.regime_config()?;
            let mut mods = Vec::new();
            for b in moderate {
                let e = bench.parse_expr(b)?;
                let v = classify(&e, &cfg)?;
                if !v.is_moderate() {
                    return Err(Error::Config("ideal check moderate sample is not moderate".into()));
                }
                mods.push((e.describe(), e, v));
            }
            let mut negs = Vec::new();
            for b in negligible {
                let e = bench.parse_expr(b)?;
                let v = classify(&e, &cfg)?;
                if !v.is_negligible() {
                    return Err(Error::Config(
                        "ideal check negligible sample is not negligible".into(),
                    ));
                }
                negs.push((e.describe(), e, v));
            }
            let report = ideal_check(&cfg, &mods, &negs)?;
            Ok(TaskResult {
                name: name.clone(),
                passed: report.passed,
                detail: report
                    .rows
                    .iter()
                    .map(|r| {
                        format!(
                            "{} (cap {}): {}",
                            r.pair,
                            r.adjusted_k_max,
                            if r.negligible { "negligible" } else { "NOT negligible" }
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("; "),
                data: serde_json::to_value(&report).unwrap_or(json!({})),
            })
        }
    }
}

fn push_verdict_curves(name: &str, verdict: &Verdict, curves: &mut Curves) {
    for row in &verdict.rows {
        for &(eps, v) in &row.samples {
            curves.push((format!("{name}/{}", row.task), eps, v, 0.0));
        }
    }
}

fn run_sheaf_suite(
    bench: &Workbench,
    name: &str,
    cover_spec: &[[f64; 2]],
    curves: &mut Curves,
) -> Result<TaskResult> {
    let intervals: Vec<(f64, f64)> = cover_spec.iter().map(|b| (b[0], b[1])).collect();
    let cover = Cover::new_1d(bench.domain, &intervals, 4.0 * bench.grid.dx(0))?;
    let pu = PartitionOfUnity::build_1d(&cover, bench.params.psi_q)?;
    pu.verify(&bench.grid)?;
    let (test_nets, _) = bench.certified_families()?;
    let net = test_nets[0].as_ref();
    let eps0 = pu
        .eps_threshold(net)
        .ok_or_else(|| Error::Config("no eps clears the partition margin; extend the grid".into()))?;

    let mut checks: Vec<(String, bool, String)> = Vec::new();

    // restriction consistency: restricted net equals the original on inner
    // windows below the threshold
    let restricted = restrict_net(net, &pu)?;
    let probe_u = DistributionRep::delta(bench.grid.clone(), [0.0, 0.0])
        .plus(&DistributionRep::heaviside(bench.grid.clone(), 0, 0.3))?;
    let w = bench.windows[0].probe;
    let mut worst = 0.0f64;
    let mut used = 0;
    for (k, &e) in net.eps_grid.iter().enumerate() {
        if e > eps0 {
            continue;
        }
        let a = net.ops[k].apply_dist(&probe_u)?;
        let b = restricted.ops[k].apply_dist(&probe_u)?;
        let d = a.sub(&b)?.sup_on(&w) / a.sup_on(&w).max(1.0);
        curves.push((format!("{name}/restrict-defect"), e, d, 1e-8));
        worst = worst.max(d);
        used += 1;
    }
    checks.push((
        format!("restriction agreement below eps0 = {eps0} ({used} eps values)"),
        used > 0 && worst <= 1e-8,
        format!("worst relative defect {worst:.3e}"),
    ));

    // agreeing operators restrict to agreeing operators
    {
        let far = colombeau_core::calculus::mask::SmoothMask::plateau(
            &BoxRegion::new_1d(2.9, 3.4),
            &BoxRegion::new_1d(2.6, 3.7),
            bench.params.psi_q,
        );
        let k = net.len() / 2;
        let op1 = net.ops[k].as_ref().clone();
        let op2 = op1.plus(&op1.post_mul(far));
        let pieces = pu.pieces();
        let r1 = colombeau_core::basic_space::restrict_operator(&op1, &pieces);
        let r2 = colombeau_core::basic_space::restrict_operator(&op2, &pieces);
        let a = r1.apply_dist(&probe_u)?;
        let b = r2.apply_dist(&probe_u)?;
        let d = a.sub(&b)?.sup_on(&w) / a.sup_on(&w).max(1.0);
        checks.push((
            "restriction of operators agreeing on the window".into(),
            d <= 1e-10,
            format!("defect {d:.3e}"),
        ));
    }

    // glue of patch restrictions reproduces the net
    {
        let delta = 0.1 * bench.domain.len(0) / cover.patches.len() as f64;
        let mut patch_nets = Vec::new();
        for i in 0..cover.patches.len() {
            let pieces = pu.patch_restriction(i, delta);
            let mut r = net.map_ops(format!("patch-{i}"), net.kind, |op| {
                colombeau_core::basic_space::restrict_operator(op, &pieces)
            });
            r.kind_certified = net.kind_certified;
            patch_nets.push(r);
        }
        let refs: Vec<&colombeau_core::regularization::RegNet> = patch_nets.iter().collect();
        let glued = glue_nets(&pu, &refs, &probe_u, 1e-6, 0.9 * delta)?;
        let mut worst = 0.0f64;
        let mut used = 0;
        for (k, &e) in net.eps_grid.iter().enumerate() {
            if e > eps0 || net.ops[k].radius >= 0.95 * delta {
                continue;
            }
            let a = net.ops[k].apply_dist(&probe_u)?;
            let b = glued.ops[k].apply_dist(&probe_u)?;
            let d = a.sub(&b)?.sup_on(&w) / a.sup_on(&w).max(1.0);
            curves.push((format!("{name}/glue-defect"), e, d, 1e-8));
            worst = worst.max(d);
            used += 1;
        }
        checks.push((
            format!("glue of restrictions reproduces the net ({used} eps values)"),
            used > 0 && worst <= 1e-8,
            format!("worst relative defect {worst:.3e}"),
        ));
    }

    // expression layer: glue of restrictions of iota(delta) is equivalent to it
    let cfg = bench.regime_config()?;
    {
        let e = GFExpr::iota(
            bench.domain,
            DistributionRep::delta(bench.grid.clone(), [0.0, 0.0]),
        );
        let mut locals = Vec::new();
        for i in 0..cover.patches.len() {
            let patch_pieces = pu.patch_restriction(i, 0.35);
            locals.push(GFExpr::restricted(cover.patches[i], patch_pieces, &e));
        }
        let glued = glue_exprs(&pu, &locals, &cfg, false)?;
        let (eq, verdict) = equivalent(&glued, &e, &cfg)?;
        push_verdict_curves(&format!("{name}/expr-glue"), &verdict, curves);
        checks.push((
            "glued expression equivalent to the original".into(),
            eq,
            format!("{:?}", verdict.classification),
        ));
        // glued moderate pieces stay moderate
        let gv = classify(&glued, &cfg)?;
        checks.push((
            "glued expression remains moderate".into(),
            gv.is_moderate(),
            format!("{:?}", gv.classification),
        ));
    }

    // verdict stability of iota(delta) under restriction
    {
        let e = GFExpr::iota(
            bench.domain,
            DistributionRep::delta(bench.grid.clone(), [0.0, 0.0]),
        );
        let v_box = cover.patches[1];
        let patch_pu = PartitionOfUnity::single_core(v_box, 0.1, bench.params.psi_q);
        let restricted = restrict_expr(&e, v_box, &patch_pu);
        let base = classify(&e, &cfg)?;
        let sub = classify(&restricted, &cfg)?;
        let same = base.is_moderate() == sub.is_moderate()
            && base.is_negligible() == sub.is_negligible();
        checks.push((
            "verdict stability across restriction".into(),
            same,
            format!(
                "{:?} vs {:?}",
                base.classification, sub.classification
            ),
        ));
    }

    // fineness: a plateau morphism acts as the identity up to negligibility
    {
        let plateau = colombeau_core::calculus::mask::SmoothMask::plateau(
            &bench.windows[0].probe.shrink(-0.4),
            &bench.windows[0].probe.shrink(-0.8),
            bench.params.psi_q,
        );
        let e = GFExpr::iota(
            bench.domain,
            DistributionRep::delta(bench.grid.clone(), [0.0, 0.0]),
        );
        let me = apply_morphism_expr(&e, &plateau);
        let (eq, verdict) = equivalent(&me, &e, &cfg)?;
        push_verdict_curves(&format!("{name}/fineness"), &verdict, curves);
        checks.push((
            "plateau morphism is the identity up to negligibility".into(),
            eq,
            format!("{:?}", verdict.classification),
        ));
    }

    let passed = checks.iter().all(|c| c.1);
    Ok(TaskResult {
        name: name.to_string(),
        passed,
        detail: checks
            .iter()
            .map(|(n, ok, d)| format!("[{}] {n}: {d}", if *ok { "ok" } else { "FAIL" }))
            .collect::<Vec<_>>()
            .join("; "),
        data: json!({
            "eps_threshold": eps0,
            "checks": checks.iter().map(|(n, ok, d)| json!({"check": n, "passed": ok, "detail": d})).collect::<Vec<_>>(),
        }),
    })
}
