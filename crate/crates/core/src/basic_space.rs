//! Expression DAG for elements of the basic space: embeddings of
//! distributions and smooth functions, sums, products, multilinear lifts,
//! derivation lifts, diffeomorphism pushforwards, and the restriction /
//! gluing / morphism wrappers of the sheaf layer.
//!
//! Every node's evaluation is polynomial in the regularization operator
//! composed with fixed continuous linear maps, so smoothness in the operator
//! argument holds structurally, and higher differentials are computed by
//! exact structural recursion. Numerical differentiation appears only as a
//! test oracle.

use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::coeff::SmoothCoeff;
use crate::calculus::diffeo::Diffeo;
use crate::calculus::dist::DistributionRep;
use crate::calculus::grid::{BoxRegion, Grid, GridFunction};
use crate::calculus::linop::LinOpSpec;
use crate::calculus::mask::SmoothMask;
use crate::error::{Error, Result};
use crate::regularization::op::RegOperator;

/// Jointly continuous multilinear operations on the smooth side.
#[derive(Debug, Clone)]
pub enum MultiLinear {
    /// pointwise n-fold product
    Product,
    /// pointwise product weighted by a fixed smooth function
    WeightedProduct { omega: SmoothCoeff },
}

impl MultiLinear {
    fn apply(&self, grid: &Arc<Grid>, factors: &[GridFunction]) -> Result<GridFunction> {
        let mut acc = match self {
            MultiLinear::Product => {
                GridFunction::from_fn(grid.clone(), |_| Complex64::new(1.0, 0.0))
            }
            MultiLinear::WeightedProduct { omega } => omega.samples(grid),
        };
        for f in factors {
            acc = acc.mul(f)?;
        }
        Ok(acc)
    }
}

/// Mask pair describing one partition piece of a restriction: the partition
/// multiplier eta_i and the extension cutoff behind tau_i.
#[derive(Debug, Clone)]
pub struct RestrictPiece {
    pub eta: SmoothMask,
    pub tau_cut: SmoothMask,
}

/// One summand of a gluing: outer partition multiplier, extension cutoff on
/// the smooth side, the operator-restriction data for the patch, and the
/// local expression.
#[derive(Clone)]
pub struct GluePiece {
    pub eta: SmoothMask,
    pub tau_cut: SmoothMask,
    /// partition pieces realizing the operator restriction onto this patch
    pub op_restriction: Vec<RestrictPiece>,
    pub expr: Arc<GFExpr>,
}

#[derive(Clone)]
pub enum ExprNode {
    /// iota(u): Phi -> Phi(u)
    Iota(DistributionRep),
    /// sigma(f): Phi -> f
    Sigma(GridFunction),
    Sum(Vec<(Complex64, Arc<GFExpr>)>),
    Prod(Arc<GFExpr>, Arc<GFExpr>),
    MultiLift {
        op: MultiLinear,
        args: Vec<Arc<GFExpr>>,
    },
    /// derivation lift: T(R(Phi)) - dR(Phi)(T o Phi - Phi o T)
    Hat(LinOpSpec, Arc<GFExpr>),
    /// diffeomorphism action: mu(R(mu^{-1} o Phi o mu))
    Pushforward {
        map: Arc<Diffeo>,
        stretch: f64,
        inner: Arc<GFExpr>,
    },
    /// restriction onto a smaller open set through a partition of unity
    Restrict {
        pieces: Vec<RestrictPiece>,
        inner: Arc<GFExpr>,
    },
    /// gluing of local expressions over a cover
    Glue { pieces: Vec<GluePiece> },
    /// composition with a sheaf morphism (smooth multiplier)
    MorphApply(SmoothMask, Arc<GFExpr>),
}

/// A basic-space expression with its domain tag.
#[derive(Clone)]
pub struct GFExpr {
    pub domain: BoxRegion,
    pub node: ExprNode,
}

impl std::fmt::Debug for GFExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GFExpr({})", self.describe())
    }
}

impl GFExpr {
    pub fn iota(domain: BoxRegion, u: DistributionRep) -> Arc<GFExpr> {
        Arc::new(GFExpr {
            domain,
            node: ExprNode::Iota(u),
        })
    }

    pub fn sigma(domain: BoxRegion, f: GridFunction) -> Arc<GFExpr> {
        Arc::new(GFExpr {
            domain,
            node: ExprNode::Sigma(f),
        })
    }

    pub fn sum(terms: Vec<(Complex64, Arc<GFExpr>)>) -> Result<Arc<GFExpr>> {
        let domain = terms
            .first()
            .map(|(_, e)| e.domain)
            .ok_or_else(|| Error::Config("empty sum".into()))?;
        for (_, e) in &terms {
            if e.domain != domain {
                return Err(Error::DomainMismatch("sum across different domains".into()));
            }
        }
        Ok(Arc::new(GFExpr {
            domain,
            node: ExprNode::Sum(terms),
        }))
    }

    pub fn minus(a: &Arc<GFExpr>, b: &Arc<GFExpr>) -> Result<Arc<GFExpr>> {
        GFExpr::sum(vec![
            (Complex64::new(1.0, 0.0), a.clone()),
            (Complex64::new(-1.0, 0.0), b.clone()),
        ])
    }

    pub fn prod(a: &Arc<GFExpr>, b: &Arc<GFExpr>) -> Result<Arc<GFExpr>> {
        if a.domain != b.domain {
            return Err(Error::DomainMismatch("product across different domains".into()));
        }
        Ok(Arc::new(GFExpr {
            domain: a.domain,
            node: ExprNode::Prod(a.clone(), b.clone()),
        }))
    }

    pub fn multilift(op: MultiLinear, args: Vec<Arc<GFExpr>>) -> Result<Arc<GFExpr>> {
        let domain = args
            .first()
            .map(|e| e.domain)
            .ok_or_else(|| Error::Config("multilift needs at least one factor".into()))?;
        for e in &args {
            if e.domain != domain {
                return Err(Error::DomainMismatch("multilift across different domains".into()));
            }
        }
        Ok(Arc::new(GFExpr {
            domain,
            node: ExprNode::MultiLift { op, args },
        }))
    }

    pub fn hat(op: LinOpSpec, inner: &Arc<GFExpr>) -> Arc<GFExpr> {
        Arc::new(GFExpr {
            domain: inner.domain,
            node: ExprNode::Hat(op, inner.clone()),
        })
    }

    /// Pushforward along a catalog diffeomorphism; `stretch` bounds the
    /// stretching of both map directions, for the support arithmetic of
    /// conjugated operators.
    pub fn pushforward(map: Arc<Diffeo>, stretch: f64, inner: &Arc<GFExpr>) -> Arc<GFExpr> {
        Arc::new(GFExpr {
            domain: inner.domain,
            node: ExprNode::Pushforward {
                map,
                stretch,
                inner: inner.clone(),
            },
        })
    }

    pub fn morph_apply(mask: SmoothMask, inner: &Arc<GFExpr>) -> Arc<GFExpr> {
        Arc::new(GFExpr {
            domain: inner.domain,
            node: ExprNode::MorphApply(mask, inner.clone()),
        })
    }

    pub fn restricted(
        domain: BoxRegion,
        pieces: Vec<RestrictPiece>,
        inner: &Arc<GFExpr>,
    ) -> Arc<GFExpr> {
        Arc::new(GFExpr {
            domain,
            node: ExprNode::Restrict {
                pieces,
                inner: inner.clone(),
            },
        })
    }

    pub fn glued(domain: BoxRegion, pieces: Vec<GluePiece>) -> Arc<GFExpr> {
        Arc::new(GFExpr {
            domain,
            node: ExprNode::Glue { pieces },
        })
    }

    pub fn describe(&self) -> String {
        match &self.node {
            ExprNode::Iota(_) => "iota".into(),
            ExprNode::Sigma(_) => "sigma".into(),
            ExprNode::Sum(v) => format!("sum[{}]", v.len()),
            ExprNode::Prod(a, b) => format!("({} * {})", a.describe(), b.describe()),
            ExprNode::MultiLift { args, .. } => format!("lift[{}]", args.len()),
            ExprNode::Hat(t, e) => format!("hat[{}]({})", t.describe(), e.describe()),
            ExprNode::Pushforward { map, inner, .. } => {
                format!("push[{}]({})", map.name, inner.describe())
            }
            ExprNode::Restrict { inner, .. } => format!("restrict({})", inner.describe()),
            ExprNode::Glue { pieces } => format!("glue[{}]", pieces.len()),
            ExprNode::MorphApply(_, e) => format!("morph({})", e.describe()),
        }
    }
}

/// Depth-times-order budget for nested derivation lifts; each Hat node
/// raises the differential order of its subexpression by one.
pub const HAT_BUDGET: usize = 6;
/// Default cap on the differential order in classification sweeps.
pub const L_MAX_DEFAULT: usize = 2;

/// Evaluate the expression at a regularization operator.
pub fn eval(expr: &GFExpr, phi: &RegOperator) -> Result<GridFunction> {
    differential(expr, phi, &[])
}

/// Exact structural differential d^l R(Phi)(Psi_1, ..., Psi_l) with
/// l = directions.len().
pub fn differential(
    expr: &GFExpr,
    phi: &RegOperator,
    dirs: &[&RegOperator],
) -> Result<GridFunction> {
    let l = dirs.len();
    if l > HAT_BUDGET {
        return Err(Error::OrderCap {
            order: l,
            cap: HAT_BUDGET,
        });
    }
    let grid = phi.grid.clone();
    match &expr.node {
        ExprNode::Iota(u) => match l {
            0 => phi.apply_dist(u),
            1 => dirs[0].apply_dist(u),
            _ => Ok(GridFunction::zero(grid)),
        },
        ExprNode::Sigma(f) => {
            if l == 0 {
                Ok(f.clone())
            } else {
                Ok(GridFunction::zero(grid))
            }
        }
        ExprNode::Sum(terms) => {
            let mut acc = GridFunction::zero(grid);
            for (c, e) in terms {
                acc = acc.add(&differential(e, phi, dirs)?.scale(*c))?;
            }
            Ok(acc)
        }
        ExprNode::Prod(a, b) => {
            // Leibniz over all splittings of the direction slots
            let mut acc = GridFunction::zero(grid);
            for subset in 0..(1usize << l) {
                let (da, db) = split_dirs(dirs, subset);
                let va = differential(a, phi, &da)?;
                let vb = differential(b, phi, &db)?;
                acc = acc.add(&va.mul(&vb)?)?;
            }
            Ok(acc)
        }
        ExprNode::MultiLift { op, args } => {
            let n = args.len();
            let mut acc = GridFunction::zero(grid.clone());
            // assignments of each direction slot to one factor
            let total = n.pow(l as u32);
            for code in 0..total {
                let mut assignment = vec![Vec::new(); n];
                let mut c = code;
                for d in dirs {
                    assignment[c % n].push(*d);
                    c /= n;
                }
                let mut factors = Vec::with_capacity(n);
                for (e, slots) in args.iter().zip(&assignment) {
                    factors.push(differential(e, phi, slots)?);
                }
                acc = acc.add(&op.apply(&grid, &factors)?)?;
            }
            Ok(acc)
        }
        ExprNode::Hat(t, inner) => {
            // T(d^l S) - d^{l+1} S(Phi)(T^RO Phi, dirs)
            //          - sum_i d^l S(Phi)(T^RO Psi_i, dirs without i)
            let commutator = |x: &RegOperator| -> RegOperator {
                x.post_lin(t.clone())
                    .plus(&x.pre_lin(t.clone()).scaled(Complex64::new(-1.0, 0.0)))
            };
            let head = t.apply_grid(&differential(inner, phi, dirs)?)?;
            let t_phi = commutator(phi);
            let mut extended: Vec<&RegOperator> = Vec::with_capacity(l + 1);
            extended.push(&t_phi);
            extended.extend_from_slice(dirs);
            let mut acc = head.sub(&differential(inner, phi, &extended)?)?;
            for i in 0..l {
                let t_dir = commutator(dirs[i]);
                let mut rest: Vec<&RegOperator> = Vec::with_capacity(l);
                rest.push(&t_dir);
                for (j, d) in dirs.iter().enumerate() {
                    if j != i {
                        rest.push(*d);
                    }
                }
                acc = acc.sub(&differential(inner, phi, &rest)?)?;
            }
            Ok(acc)
        }
        ExprNode::Pushforward {
            map,
            stretch,
            inner,
        } => {
            let conj_phi = phi.conjugated(map.clone(), false, *stretch);
            let conj_dirs: Vec<RegOperator> = dirs
                .iter()
                .map(|d| d.conjugated(map.clone(), false, *stretch))
                .collect();
            let refs: Vec<&RegOperator> = conj_dirs.iter().collect();
            let out = differential(inner, &conj_phi, &refs)?;
            Ok(map.act_smooth(&out))
        }
        ExprNode::Restrict { pieces, inner } => {
            let mut acc = GridFunction::zero(grid.clone());
            for p in pieces {
                let f_phi = phi.post_mul(p.tau_cut.clone());
                let f_dirs: Vec<RegOperator> = dirs
                    .iter()
                    .map(|d| d.post_mul(p.tau_cut.clone()))
                    .collect();
                let refs: Vec<&RegOperator> = f_dirs.iter().collect();
                let v = differential(inner, &f_phi, &refs)?;
                acc = acc.add(&v.mul(&p.eta.samples(&grid))?)?;
            }
            Ok(acc)
        }
        ExprNode::Glue { pieces } => {
            let mut acc = GridFunction::zero(grid.clone());
            for p in pieces {
                let rphi = restrict_operator(phi, &p.op_restriction);
                let rdirs: Vec<RegOperator> = dirs
                    .iter()
                    .map(|d| restrict_operator(d, &p.op_restriction))
                    .collect();
                let refs: Vec<&RegOperator> = rdirs.iter().collect();
                let v = differential(&p.expr, &rphi, &refs)?;
                let extended = v.mul(&p.tau_cut.samples(&grid))?;
                acc = acc.add(&extended.mul(&p.eta.samples(&grid))?)?;
            }
            Ok(acc)
        }
        ExprNode::MorphApply(mask, inner) => {
            differential(inner, phi, dirs)?.mul(&mask.samples(&grid))
        }
    }
}

/// The operator restriction sum_i eta_i o Phi o tau_i as a single operator.
pub fn restrict_operator(phi: &RegOperator, pieces: &[RestrictPiece]) -> RegOperator {
    let mut acc: Option<RegOperator> = None;
    for p in pieces {
        let part = phi.pre_mul(p.tau_cut.clone()).post_mul(p.eta.clone());
        acc = Some(match acc {
            None => part,
            Some(a) => a.plus(&part),
        });
    }
    acc.unwrap_or_else(|| RegOperator::zero(phi.grid.clone(), phi.eps))
}

fn split_dirs<'a>(
    dirs: &[&'a RegOperator],
    subset: usize,
) -> (Vec<&'a RegOperator>, Vec<&'a RegOperator>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, d) in dirs.iter().enumerate() {
        if subset & (1 << i) != 0 {
            a.push(*d);
        } else {
            b.push(*d);
        }
    }
    (a, b)
}
