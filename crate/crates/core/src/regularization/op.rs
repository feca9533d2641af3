//! The algebra of regularization operators: a concrete mollifier at the
//! leaves, composed with linear operators, multipliers, input cutoffs,
//! diffeomorphism conjugation, sums and scalings. Every transformation the
//! sheaf and quotient layers perform stays inside this algebra.

use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::coeff::SmoothCoeff;
use crate::calculus::diffeo::Diffeo;
use crate::calculus::dist::DistributionRep;
use crate::calculus::grid::{Grid, GridFunction};
use crate::calculus::linop::LinOpSpec;
use crate::calculus::mask::SmoothMask;
use crate::error::Result;
use crate::regularization::mollifier::MollifierOp;

#[derive(Clone)]
pub enum OpNode {
    Mollifier(Arc<MollifierOp>),
    Zero,
    Scaled(Complex64, Box<OpNode>),
    Sum(Vec<OpNode>),
    /// T o Phi
    PostLin(LinOpSpec, Box<OpNode>),
    /// Phi o T
    PreLin(Box<OpNode>, LinOpSpec),
    /// eta o Phi: multiplier on the output
    PostMul(SmoothMask, Box<OpNode>),
    /// Phi o (u -> cut * u): input cutoff, the extension-operator shape
    PreMul(Box<OpNode>, SmoothMask),
    /// conjugation by a diffeomorphism; forward = mu o Phi o mu^{-1},
    /// otherwise mu^{-1} o Phi o mu
    Conjugated {
        map: Arc<Diffeo>,
        forward: bool,
        inner: Box<OpNode>,
    },
}

impl std::fmt::Debug for OpNode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OpNode::Mollifier(m) => write!(f, "mollify(eps={})", m.eps),
            OpNode::Zero => write!(f, "0"),
            OpNode::Scaled(c, n) => write!(f, "{c} * {n:?}"),
            OpNode::Sum(v) => write!(f, "sum[{}]", v.len()),
            OpNode::PostLin(t, n) => write!(f, "{} o {n:?}", t.describe()),
            OpNode::PreLin(n, t) => write!(f, "{n:?} o {}", t.describe()),
            OpNode::PostMul(_, n) => write!(f, "mask o {n:?}"),
            OpNode::PreMul(n, _) => write!(f, "{n:?} o mask"),
            OpNode::Conjugated { map, forward, .. } => {
                write!(f, "conj[{}={}]", map.name, forward)
            }
        }
    }
}

/// A single regularization operator with its localization metadata.
#[derive(Clone, Debug)]
pub struct RegOperator {
    pub grid: Arc<Grid>,
    pub eps: f64,
    /// upper bound on how far the operator spreads supports
    pub radius: f64,
    pub provenance: String,
    pub node: OpNode,
}

impl RegOperator {
    pub fn mollifier(grid: Arc<Grid>, op: Arc<MollifierOp>) -> RegOperator {
        let radius = op.support_radius();
        let eps = op.eps;
        RegOperator {
            grid,
            eps,
            radius,
            provenance: "mollifier".into(),
            node: OpNode::Mollifier(op),
        }
    }

    pub fn zero(grid: Arc<Grid>, eps: f64) -> RegOperator {
        RegOperator {
            grid,
            eps,
            radius: 0.0,
            provenance: "zero".into(),
            node: OpNode::Zero,
        }
    }

    pub fn scaled(&self, c: Complex64) -> RegOperator {
        RegOperator {
            grid: self.grid.clone(),
            eps: self.eps,
            radius: self.radius,
            provenance: self.provenance.clone(),
            node: OpNode::Scaled(c, Box::new(self.node.clone())),
        }
    }

    pub fn plus(&self, other: &RegOperator) -> RegOperator {
        RegOperator {
            grid: self.grid.clone(),
            eps: self.eps,
            radius: self.radius.max(other.radius),
            provenance: format!("{}+{}", self.provenance, other.provenance),
            node: OpNode::Sum(vec![self.node.clone(), other.node.clone()]),
        }
    }

    pub fn post_lin(&self, t: LinOpSpec) -> RegOperator {
        RegOperator {
            grid: self.grid.clone(),
            eps: self.eps,
            radius: self.radius,
            provenance: format!("{} o {}", t.describe(), self.provenance),
            node: OpNode::PostLin(t, Box::new(self.node.clone())),
        }
    }

    pub fn pre_lin(&self, t: LinOpSpec) -> RegOperator {
        RegOperator {
            grid: self.grid.clone(),
            eps: self.eps,
            radius: self.radius,
            provenance: format!("{} o {}", self.provenance, t.describe()),
            node: OpNode::PreLin(Box::new(self.node.clone()), t),
        }
    }

    pub fn post_mul(&self, mask: SmoothMask) -> RegOperator {
        RegOperator {
            grid: self.grid.clone(),
            eps: self.eps,
            radius: self.radius,
            provenance: format!("mask o {}", self.provenance),
            node: OpNode::PostMul(mask, Box::new(self.node.clone())),
        }
    }

    pub fn pre_mul(&self, mask: SmoothMask) -> RegOperator {
        RegOperator {
            grid: self.grid.clone(),
            eps: self.eps,
            radius: self.radius,
            provenance: format!("{} o mask", self.provenance),
            node: OpNode::PreMul(Box::new(self.node.clone()), mask),
        }
    }

    /// Conjugate by a diffeomorphism. `lip` must be an upper bound for the
    /// stretching of either map direction, used to keep the localization
    /// radius an upper bound.
    pub fn conjugated(&self, map: Arc<Diffeo>, forward: bool, lip: f64) -> RegOperator {
        RegOperator {
            grid: self.grid.clone(),
            eps: self.eps,
            radius: self.radius * lip,
            provenance: format!("conj[{}] {}", map.name, self.provenance),
            node: OpNode::Conjugated {
                map,
                forward,
                inner: Box::new(self.node.clone()),
            },
        }
    }

    pub fn apply_dist(&self, u: &DistributionRep) -> Result<GridFunction> {
        apply_dist_node(&self.node, &self.grid, u)
    }

    pub fn apply_smooth(&self, f: &GridFunction) -> Result<GridFunction> {
        apply_smooth_node(&self.node, &self.grid, f)
    }

    /// Structural bound on how much this operator amplifies band-edge
    /// round-off noise relative to a plain convolution: spectral
    /// differentiation contributes the grid bandwidth, everything else
    /// order-one factors.
    pub fn noise_gain(&self) -> f64 {
        noise_gain_node(&self.node, &self.grid)
    }
}

fn linop_gain(t: &LinOpSpec, k_max: f64) -> f64 {
    match t {
        LinOpSpec::Identity => 1.0,
        LinOpSpec::PartialDerivative { .. } => k_max,
        LinOpSpec::Multiplier { .. } => 4.0,
        LinOpSpec::FirstOrder { .. } => 8.0 * k_max + 8.0,
    }
}

fn noise_gain_node(node: &OpNode, grid: &Arc<Grid>) -> f64 {
    let k_max = (0..grid.dim).map(|a| grid.k_max(a)).fold(1.0f64, f64::max);
    match node {
        OpNode::Mollifier(_) | OpNode::Zero => 1.0,
        OpNode::Scaled(c, inner) => c.norm().max(1.0) * noise_gain_node(inner, grid),
        OpNode::Sum(parts) => parts.iter().map(|p| noise_gain_node(p, grid)).sum(),
        OpNode::PostLin(t, inner) | OpNode::PreLin(inner, t) => {
            linop_gain(t, k_max) * noise_gain_node(inner, grid)
        }
        OpNode::PostMul(_, inner) | OpNode::PreMul(inner, _) => noise_gain_node(inner, grid),
        OpNode::Conjugated { inner, .. } => 2.0 * noise_gain_node(inner, grid),
    }
}

fn apply_dist_node(node: &OpNode, grid: &Arc<Grid>, u: &DistributionRep) -> Result<GridFunction> {
    match node {
        OpNode::Mollifier(m) => m.apply_dist(u),
        OpNode::Zero => Ok(GridFunction::zero(grid.clone())),
        OpNode::Scaled(c, inner) => Ok(apply_dist_node(inner, grid, u)?.scale(*c)),
        OpNode::Sum(parts) => {
            let mut acc = GridFunction::zero(grid.clone());
            for p in parts {
                acc = acc.add(&apply_dist_node(p, grid, u)?)?;
            }
            Ok(acc)
        }
        OpNode::PostLin(t, inner) => t.apply_grid(&apply_dist_node(inner, grid, u)?),
        OpNode::PreLin(inner, t) => apply_dist_node(inner, grid, &t.apply_dist(u)?),
        OpNode::PostMul(mask, inner) => {
            apply_dist_node(inner, grid, u)?.mul(&mask.samples(grid))
        }
        OpNode::PreMul(inner, mask) => {
            let cut = u.multiplied(&SmoothCoeff::Mask(mask.clone()))?;
            apply_dist_node(inner, grid, &cut)
        }
        OpNode::Conjugated {
            map,
            forward,
            inner,
        } => {
            if *forward {
                // mu o Phi o mu^{-1}
                let moved = map.act_dist_inverse(u)?;
                let out = apply_dist_node(inner, grid, &moved)?;
                Ok(map.act_smooth(&out))
            } else {
                // mu^{-1} o Phi o mu
                let moved = map.act_dist(u)?;
                let out = apply_dist_node(inner, grid, &moved)?;
                Ok(map.pull_smooth(&out))
            }
        }
    }
}

fn apply_smooth_node(node: &OpNode, grid: &Arc<Grid>, f: &GridFunction) -> Result<GridFunction> {
    match node {
        OpNode::Mollifier(m) => m.apply_smooth(f),
        OpNode::Zero => Ok(GridFunction::zero(grid.clone())),
        OpNode::Scaled(c, inner) => Ok(apply_smooth_node(inner, grid, f)?.scale(*c)),
        OpNode::Sum(parts) => {
            let mut acc = GridFunction::zero(grid.clone());
            for p in parts {
                acc = acc.add(&apply_smooth_node(p, grid, f)?)?;
            }
            Ok(acc)
        }
        OpNode::PostLin(t, inner) => t.apply_grid(&apply_smooth_node(inner, grid, f)?),
        OpNode::PreLin(inner, t) => apply_smooth_node(inner, grid, &t.apply_grid(f)?),
        OpNode::PostMul(mask, inner) => {
            apply_smooth_node(inner, grid, f)?.mul(&mask.samples(grid))
        }
        OpNode::PreMul(inner, mask) => {
            apply_smooth_node(inner, grid, &f.mul(&mask.samples(grid))?)
        }
        OpNode::Conjugated {
            map,
            forward,
            inner,
        } => {
            if *forward {
                let moved = map.pull_smooth(f);
                let out = apply_smooth_node(inner, grid, &moved)?;
                Ok(map.act_smooth(&out))
            } else {
                let moved = map.act_smooth(f);
                let out = apply_smooth_node(inner, grid, &moved)?;
                Ok(map.pull_smooth(&out))
            }
        }
    }
}
