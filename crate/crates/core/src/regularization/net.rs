//! Epsilon-indexed nets of regularization operators, their localizing
//! certificates, and the net transformations that produce new test objects
//! and 0-test objects from old ones.

use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::dist::DistributionRep;
use crate::calculus::grid::{Grid, Window};
use crate::calculus::linop::LinOpSpec;
use crate::calculus::probes;
use crate::error::{Error, Result};
use crate::regularization::mollifier::{MollifierOp, MollifierParams};
use crate::regularization::op::RegOperator;

/// What a net has been verified to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum NetKind {
    General,
    TestObject,
    ZeroTestObject,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LocalizingCertificate {
    /// (eps, localization radius)
    pub radii: Vec<(f64, f64)>,
    pub radius_shrinks: bool,
    /// a far-separated Dirac probe produced an exact zero on the window
    pub far_probe_zero: bool,
}

/// An eps-indexed family of regularization operators.
#[derive(Clone)]
pub struct RegNet {
    pub grid: Arc<Grid>,
    pub eps_grid: Vec<f64>,
    pub ops: Vec<Arc<RegOperator>>,
    pub kind: NetKind,
    /// true once verify_test_object has confirmed the kind
    pub kind_certified: bool,
    pub provenance: String,
    pub localizing: Option<LocalizingCertificate>,
}

impl std::fmt::Debug for RegNet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RegNet")
            .field("eps", &self.eps_grid)
            .field("kind", &self.kind)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl RegNet {
    pub fn op(&self, i: usize) -> &Arc<RegOperator> {
        &self.ops[i]
    }

    pub fn len(&self) -> usize {
        self.eps_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps_grid.is_empty()
    }

    /// Apply a per-operator transformation, keeping the eps grid.
    pub fn map_ops(
        &self,
        provenance: impl Into<String>,
        kind: NetKind,
        f: impl Fn(&Arc<RegOperator>) -> RegOperator,
    ) -> RegNet {
        let ops = self.ops.iter().map(|op| Arc::new(f(op))).collect();
        let mut net = RegNet {
            grid: self.grid.clone(),
            eps_grid: self.eps_grid.clone(),
            ops,
            kind,
            kind_certified: false,
            provenance: provenance.into(),
            localizing: None,
        };
        net.localizing = Some(net.radius_certificate_only());
        net
    }

    fn radius_certificate_only(&self) -> LocalizingCertificate {
        let radii: Vec<(f64, f64)> = self
            .eps_grid
            .iter()
            .zip(&self.ops)
            .map(|(&e, op)| (e, op.radius))
            .collect();
        let mut shrinks = true;
        for w in radii.windows(2) {
            if w[0].0 > w[1].0 && w[1].1 > w[0].1 + 1e-12 {
                shrinks = false;
            }
        }
        LocalizingCertificate {
            radii,
            radius_shrinks: shrinks,
            far_probe_zero: false,
        }
    }

    /// Verify the localizing property: radii shrink along the net and a
    /// Dirac far from the window yields an exact zero there.
    pub fn certify_localizing(&mut self, window: &Window) -> Result<&LocalizingCertificate> {
        let mut cert = self.radius_certificate_only();
        let max_radius = cert
            .radii
            .iter()
            .map(|&(_, r)| r)
            .fold(0.0f64, f64::max);
        // place the probe beyond the largest reach of any operator
        let mut point = [0.0f64; 2];
        let dim = self.grid.dim;
        point[0] = window.probe.hi[0] + max_radius + 0.2 * self.grid.domain.len(0);
        if point[0] > self.grid.domain.hi[0] {
            point[0] = self.grid.domain.hi[0] - 1e-3;
        }
        let far = DistributionRep::delta(self.grid.clone(), point);
        let mut ok = true;
        for (i, &eps) in self.eps_grid.iter().enumerate() {
            let dist_to_window = point[0] - window.probe.hi[0];
            if self.ops[i].radius >= dist_to_window {
                continue;
            }
            let out = self.ops[i].apply_dist(&far)?;
            let scale = out.max_abs().max(1e-30);
            if out.sup_on(&window.probe) > 1e-12 * scale {
                ok = false;
            }
            let _ = eps;
            let _ = dim;
        }
        cert.far_probe_zero = ok;
        self.localizing = Some(cert);
        Ok(self.localizing.as_ref().unwrap())
    }
}

/// Build the mollifier net over an eps grid.
pub fn build_mollifier_net(
    grid: Arc<Grid>,
    params: &MollifierParams,
    eps_grid: &[f64],
) -> Result<RegNet> {
    let mut ops = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let m = MollifierOp::build(grid.clone(), params, eps)?;
        ops.push(Arc::new(RegOperator::mollifier(grid.clone(), m)));
    }
    let mut net = RegNet {
        grid,
        eps_grid: eps_grid.to_vec(),
        ops,
        kind: NetKind::General,
        kind_certified: false,
        provenance: "mollifier".into(),
        localizing: None,
    };
    net.localizing = Some(net.radius_certificate_only());
    Ok(net)
}

/// The zero net, trivially a localizing 0-test object.
pub fn zero_net(grid: Arc<Grid>, eps_grid: &[f64]) -> RegNet {
    let ops = eps_grid
        .iter()
        .map(|&e| Arc::new(RegOperator::zero(grid.clone(), e)))
        .collect();
    let mut net = RegNet {
        grid,
        eps_grid: eps_grid.to_vec(),
        ops,
        kind: NetKind::ZeroTestObject,
        kind_certified: false,
        provenance: "zero".into(),
        localizing: None,
    };
    net.localizing = Some(net.radius_certificate_only());
    net
}

/// Net transformations of test objects.
#[derive(Debug, Clone)]
pub enum TransformSpec {
    /// sum_i T_i o Phi_{i,eps} with sum_i T_i = id: stays a test object
    PartitionCombine { ops: Vec<LinOpSpec> },
    /// T o Psi_eps for a 0-test object: stays a 0-test object
    PostCompose { op: LinOpSpec },
    /// T o Phi_eps - Phi_eps o T: a 0-test object
    Commutator { op: LinOpSpec },
    /// Phi_eps - Psi_eps of two test objects: a 0-test object
    Difference,
}

/// Transform nets per the composition rules, assigning the provisional kind
/// the rules guarantee; verify_test_object confirms it.
pub fn transform_net(spec: &TransformSpec, inputs: &[&RegNet]) -> Result<RegNet> {
    if inputs.is_empty() {
        return Err(Error::Config("transform needs at least one input net".into()));
    }
    let grid = inputs[0].grid.clone();
    let eps = &inputs[0].eps_grid;
    for net in inputs {
        if net.eps_grid != *eps {
            return Err(Error::Config("transform inputs must share the eps grid".into()));
        }
    }
    match spec {
        TransformSpec::PartitionCombine { ops } => {
            if ops.len() != inputs.len() {
                return Err(Error::Config(
                    "partition combine needs one operator per input net".into(),
                ));
            }
            // verify sum T_i = id on probe functions
            let probes = [
                probes::smooth_probe(&grid, "gaussian")?,
                probes::smooth_probe(&grid, "bump")?,
            ];
            for p in &probes {
                let mut acc = crate::calculus::grid::GridFunction::zero(grid.clone());
                for t in ops {
                    acc = acc.add(&t.apply_grid(p)?)?;
                }
                let err = acc.sub(p)?.max_abs();
                if err > 1e-10 * p.max_abs().max(1.0) {
                    return Err(Error::Config(format!(
                        "operators do not sum to the identity (defect {err:.3e})"
                    )));
                }
            }
            let mut out_ops = Vec::with_capacity(eps.len());
            for i in 0..eps.len() {
                let mut acc: Option<RegOperator> = None;
                for (t, net) in ops.iter().zip(inputs) {
                    let part = net.ops[i].post_lin(t.clone());
                    acc = Some(match acc {
                        None => part,
                        Some(a) => a.plus(&part),
                    });
                }
                out_ops.push(Arc::new(acc.unwrap()));
            }
            let mut net = RegNet {
                grid,
                eps_grid: eps.clone(),
                ops: out_ops,
                kind: NetKind::TestObject,
                kind_certified: false,
                provenance: "partition-combine".into(),
                localizing: None,
            };
            net.localizing = Some(net.radius_certificate_only());
            Ok(net)
        }
        TransformSpec::PostCompose { op } => {
            if inputs[0].kind != NetKind::ZeroTestObject {
                return Err(Error::Config(
                    "post-composition preserves only 0-test objects".into(),
                ));
            }
            Ok(inputs[0].map_ops("post-compose", NetKind::ZeroTestObject, |o| {
                o.post_lin(op.clone())
            }))
        }
        TransformSpec::Commutator { op } => {
            if inputs[0].kind == NetKind::General {
                return Err(Error::Config(
                    "commutator input must be a test object or 0-test object".into(),
                ));
            }
            Ok(inputs[0].map_ops("commutator", NetKind::ZeroTestObject, |o| {
                let t_post = o.post_lin(op.clone());
                let t_pre = o.pre_lin(op.clone());
                t_post.plus(&t_pre.scaled(Complex64::new(-1.0, 0.0)))
            }))
        }
        TransformSpec::Difference => {
            if inputs.len() != 2 {
                return Err(Error::Config("difference needs exactly two nets".into()));
            }
            let a = inputs[0];
            let b = inputs[1];
            let ops = (0..eps.len())
                .map(|i| Arc::new(a.ops[i].plus(&b.ops[i].scaled(Complex64::new(-1.0, 0.0)))))
                .collect();
            let mut net = RegNet {
                grid,
                eps_grid: eps.clone(),
                ops,
                kind: NetKind::ZeroTestObject,
                kind_certified: false,
                provenance: format!("({}) - ({})", a.provenance, b.provenance),
                localizing: None,
            };
            net.localizing = Some(net.radius_certificate_only());
            Ok(net)
        }
    }
}

/// Default dyadic eps grid 2^-from .. 2^-to.
pub fn dyadic_eps(from: u32, to: u32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-(k as i32))).collect()
}

/// The standard probe window in the middle of the domain.
pub fn standard_window(grid: &Arc<Grid>) -> Result<Window> {
    let dim = grid.dim;
    let mut probe = grid.domain;
    for a in 0..dim {
        let c = 0.5 * (grid.domain.lo[a] + grid.domain.hi[a]);
        let h = 0.175 * grid.domain.len(a);
        probe.lo[a] = c - h;
        probe.hi[a] = c + h;
    }
    Window::new(grid.domain, probe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::grid::{BoxRegion, GridFunction};

    fn setup() -> (Arc<Grid>, RegNet) {
        let grid = Grid::new(BoxRegion::new_1d(-4.0, 4.0), 1 << 13).unwrap();
        let params = MollifierParams::distribution_default();
        let net = build_mollifier_net(grid.clone(), &params, &dyadic_eps(2, 8)).unwrap();
        (grid, net)
    }

    #[test]
    fn mollifier_net_radii_shrink() {
        let (grid, mut net) = setup();
        let w = standard_window(&grid).unwrap();
        let cert = net.certify_localizing(&w).unwrap();
        assert!(cert.radius_shrinks);
        assert!(cert.far_probe_zero);
    }

    #[test]
    fn identity_commutator_is_exactly_zero() {
        let (grid, net) = setup();
        let t = TransformSpec::Commutator {
            op: LinOpSpec::Identity,
        };
        let mut net = net;
        net.kind = NetKind::TestObject;
        let out = transform_net(&t, &[&net]).unwrap();
        let u = DistributionRep::delta(grid.clone(), [0.0, 0.0]);
        for op in &out.ops {
            let v = op.apply_dist(&u).unwrap();
            assert!(v.max_abs() < 1e-14);
        }
    }

    #[test]
    fn partition_combine_requires_identity_sum() {
        let (grid, net) = setup();
        let mask = crate::calculus::mask::SmoothMask::plateau(
            &BoxRegion::new_1d(-1.0, 1.0),
            &BoxRegion::new_1d(-2.0, 2.0),
            1.0,
        );
        let bad = TransformSpec::PartitionCombine {
            ops: vec![LinOpSpec::Multiplier {
                omega: crate::calculus::coeff::SmoothCoeff::Mask(mask),
            }],
        };
        assert!(transform_net(&bad, &[&net]).is_err());
        let _ = grid;
    }

    #[test]
    fn difference_of_net_with_itself_vanishes() {
        let (grid, net) = setup();
        let mut a = net.clone();
        a.kind = NetKind::TestObject;
        let d = transform_net(&TransformSpec::Difference, &[&a, &a]).unwrap();
        assert_eq!(d.kind, NetKind::ZeroTestObject);
        let f = GridFunction::from_real_fn(grid, |x| (-x[0] * x[0]).exp());
        let v = d.ops[3].apply_smooth(&f).unwrap();
        assert!(v.max_abs() < 1e-13);
    }
}
