//! Covers, partitions of unity and extension operators; restriction and
//! gluing of regularization nets and of expressions; locality checks.
//!
//! "For eps small enough" statements are made effective through support
//! arithmetic: every restriction records the margin between its partition
//! multipliers and its extension cutoffs, and tests only assert below the
//! eps threshold where the localization radius clears that margin.

use std::sync::Arc;

use num_complex::Complex64;

use crate::basic_space::{GFExpr, GluePiece, RestrictPiece};
use crate::calculus::grid::{BoxRegion, Grid, Window};
use crate::calculus::mask::{Mask1D, SmoothMask};
use crate::error::{Error, Result};
use crate::quotient::{classify, equivalent, RegimeConfig, Verdict};
use crate::regularization::net::{NetKind, RegNet};
use crate::regularization::op::RegOperator;

/// A finite open cover of a box domain by sub-boxes (1D intervals, or a
/// tensor grid of intervals in 2D).
#[derive(Debug, Clone)]
pub struct Cover {
    pub domain: BoxRegion,
    pub patches: Vec<BoxRegion>,
}

impl Cover {
    /// 1D cover from a list of intervals; they must cover the domain with
    /// pairwise overlaps of positive width.
    pub fn new_1d(domain: BoxRegion, intervals: &[(f64, f64)], min_overlap: f64) -> Result<Cover> {
        if intervals.is_empty() || intervals.len() > 4 {
            return Err(Error::CoverMismatch("covers use 1 to 4 patches".into()));
        }
        let mut sorted = intervals.to_vec();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if sorted[0].0 > domain.lo[0] || sorted[sorted.len() - 1].1 < domain.hi[0] {
            return Err(Error::CoverMismatch("patches do not cover the domain".into()));
        }
        for w in sorted.windows(2) {
            let overlap = w[0].1 - w[1].0;
            if overlap < min_overlap {
                return Err(Error::CoverMismatch(format!(
                    "overlap {overlap} below the minimum {min_overlap}"
                )));
            }
        }
        let patches = sorted
            .iter()
            .map(|&(a, b)| BoxRegion::new_1d(a, b))
            .collect();
        Ok(Cover { domain, patches })
    }

    pub fn overlap(&self, i: usize, j: usize) -> Option<BoxRegion> {
        self.patches[i].intersect(&self.patches[j])
    }
}

/// Partition of unity subordinate to a cover, with interior sets and the
/// extension cutoffs behind the tau operators.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub cover: Cover,
    /// eta_i: sum to 1 on the domain, supp eta_i inside V_i
    pub etas: Vec<SmoothMask>,
    /// V_i strictly inside U_i, containing supp eta_i
    pub interiors: Vec<BoxRegion>,
    /// cutoffs identically 1 on V_i, supported inside U_i
    pub tau_cuts: Vec<SmoothMask>,
    /// smallest margin between any eta support and its tau plateau, and
    /// between any tau support and the patch boundary
    pub margin: f64,
}

impl PartitionOfUnity {
    /// Build the 1D partition. Transitions occupy the middle 10% of each
    /// overlap, leaving wide gaps between the multiplier supports and the
    /// patch boundaries; the interior sets sit at half gap, which maximizes
    /// the margin the localization radius has to clear.
    pub fn build_1d(cover: &Cover, q: f64) -> Result<PartitionOfUnity> {
        let n = cover.patches.len();
        let domain = cover.domain;
        // transition interval inside each consecutive overlap
        let mut cuts = Vec::new(); // (lo, hi) of transition i between patch i and i+1
        for i in 0..n.saturating_sub(1) {
            let o = cover
                .overlap(i, i + 1)
                .ok_or_else(|| Error::CoverMismatch("consecutive patches must overlap".into()))?;
            let w = o.len(0);
            cuts.push((o.lo[0] + 0.45 * w, o.hi[0] - 0.45 * w));
        }
        let mut etas = Vec::with_capacity(n);
        let mut interiors = Vec::with_capacity(n);
        let mut tau_cuts = Vec::with_capacity(n);
        let mut margin = f64::INFINITY;
        for i in 0..n {
            let up = if i == 0 { None } else { Some(cuts[i - 1]) };
            let down = if i + 1 == n { None } else { Some(cuts[i]) };
            let eta = SmoothMask {
                axes: vec![Mask1D { up, down, q }],
            };
            // support of eta_i within the patch
            let supp_lo = up.map(|(lo, _)| lo).unwrap_or(domain.lo[0] - 1.0);
            let supp_hi = down.map(|(_, hi)| hi).unwrap_or(domain.hi[0] + 1.0);
            let patch = cover.patches[i];
            // V_i halfway between the eta support and the patch boundary
            let gap_lo = supp_lo - patch.lo[0];
            let gap_hi = patch.hi[0] - supp_hi;
            let v_lo = if up.is_some() { supp_lo - 0.5 * gap_lo } else { supp_lo };
            let v_hi = if down.is_some() { supp_hi + 0.5 * gap_hi } else { supp_hi };
            let interior = BoxRegion::new_1d(v_lo, v_hi);
            // tau cutoff: 1 on V_i, 0 outside the patch
            let t_up = if up.is_some() {
                margin = margin.min(supp_lo - v_lo).min(v_lo - patch.lo[0]);
                Some((patch.lo[0], v_lo))
            } else {
                None
            };
            let t_down = if down.is_some() {
                margin = margin.min(v_hi - supp_hi).min(patch.hi[0] - v_hi);
                Some((v_hi, patch.hi[0]))
            } else {
                None
            };
            let tau = SmoothMask {
                axes: vec![Mask1D {
                    up: t_up,
                    down: t_down,
                    q,
                }],
            };
            etas.push(eta);
            interiors.push(interior);
            tau_cuts.push(tau);
        }
        if n == 1 {
            margin = 0.25 * cover.patches[0].len(0);
        }
        Ok(PartitionOfUnity {
            cover: cover.clone(),
            etas,
            interiors,
            tau_cuts,
            margin,
        })
    }

    /// Single-piece operator restriction onto patch `i`, built around the
    /// support of the outer multiplier eta_i. The restriction formula is
    /// exact on the inner plateau (support of eta_i widened by 2 delta) for
    /// operators whose localization radius stays below delta; outside the
    /// plateau it attenuates, which is the documented desk-scale semantics
    /// of a single-piece partition.
    pub fn patch_restriction(&self, i: usize, delta: f64) -> Vec<RestrictPiece> {
        let (s_lo, s_hi) = self.etas[i].axes[0].support();
        let lo = s_lo.unwrap_or(self.cover.domain.lo[0] - 2.0 * delta);
        let hi = s_hi.unwrap_or(self.cover.domain.hi[0] + 2.0 * delta);
        let eta = SmoothMask {
            axes: vec![Mask1D::plateau(
                lo - 3.0 * delta,
                lo - 2.0 * delta,
                hi + 2.0 * delta,
                hi + 3.0 * delta,
                self.etas[i].axes[0].q,
            )],
        };
        let tau = SmoothMask {
            axes: vec![Mask1D::plateau(
                lo - 5.0 * delta,
                lo - 4.0 * delta,
                hi + 4.0 * delta,
                hi + 5.0 * delta,
                self.etas[i].axes[0].q,
            )],
        };
        vec![RestrictPiece { eta, tau_cut: tau }]
    }

    /// The single-piece partition used for restricting operators onto a
    /// patch: a plateau covering the working core of the open set.
    pub fn single_core(open_set: BoxRegion, core_frac: f64, q: f64) -> PartitionOfUnity {
        let dim = open_set.dim;
        let mut core = open_set;
        let mut mid = open_set;
        for a in 0..dim {
            let m = core_frac * open_set.len(a);
            core.lo[a] += m;
            core.hi[a] -= m;
            mid.lo[a] += 0.5 * m;
            mid.hi[a] -= 0.5 * m;
        }
        let eta = SmoothMask::plateau(&core.shrink(-1e-12), &mid, q);
        let tau = SmoothMask::plateau(&mid, &open_set, q);
        PartitionOfUnity {
            cover: Cover {
                domain: open_set,
                patches: vec![open_set],
            },
            etas: vec![eta],
            interiors: vec![mid],
            tau_cuts: vec![tau],
            margin: 0.25 * core_frac * open_set.len(0),
        }
    }

    pub fn pieces(&self) -> Vec<RestrictPiece> {
        self.etas
            .iter()
            .zip(&self.tau_cuts)
            .map(|(eta, tau)| RestrictPiece {
                eta: eta.clone(),
                tau_cut: tau.clone(),
            })
            .collect()
    }

    /// Verify sum eta_i = 1 on the domain and the support/plateau relations.
    pub fn verify(&self, grid: &Arc<Grid>) -> Result<()> {
        let mut worst = 0.0f64;
        for idx in 0..grid.total_points() {
            let p = grid.point(idx);
            if !self.cover.domain.contains(&p[..grid.dim]) {
                continue;
            }
            let s: f64 = self.etas.iter().map(|e| e.eval(&p[..grid.dim])).sum();
            worst = worst.max((s - 1.0).abs());
        }
        if worst > 1e-12 {
            return Err(Error::CoverMismatch(format!(
                "partition does not sum to 1 (defect {worst:.3e})"
            )));
        }
        for (i, tau) in self.tau_cuts.iter().enumerate() {
            if !tau.is_one_on(&self.interiors[i]) {
                return Err(Error::CoverMismatch(format!(
                    "tau cutoff {i} is not 1 on its interior set"
                )));
            }
        }
        Ok(())
    }

    /// Largest eps in the grid whose localization radius clears the margin.
    pub fn eps_threshold(&self, net: &RegNet) -> Option<f64> {
        net.eps_grid
            .iter()
            .zip(&net.ops)
            .filter(|(_, op)| op.radius < 0.95 * self.margin)
            .map(|(&e, _)| e)
            .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a: f64| a.max(e))))
    }
}

/// Restriction of a net onto a smaller open set through a partition of
/// unity: Phi -> sum_i eta_i o Phi o tau_i.
pub fn restrict_net(net: &RegNet, pu: &PartitionOfUnity) -> Result<RegNet> {
    if net.localizing.is_none() {
        return Err(Error::Config("restriction needs a localizing input net".into()));
    }
    let pieces = pu.pieces();
    let mut out = net.map_ops(
        format!("restrict({})", net.provenance),
        net.kind,
        |op| crate::basic_space::restrict_operator(op, &pieces),
    );
    out.kind_certified = net.kind_certified;
    Ok(out)
}

/// Gluing of compatible nets over a cover:
/// Phi = sum_i eta_i o tau_i o Phi_i o rho_{U_i, U}.
///
/// Compatibility of the inputs is checked extensionally on overlap windows,
/// but only at eps whose localization radius stays below `compat_max_radius`
/// (the margin the caller knows its restrictions are valid under).
pub fn glue_nets(
    pu: &PartitionOfUnity,
    nets: &[&RegNet],
    probe: &crate::calculus::dist::DistributionRep,
    tol: f64,
    compat_max_radius: f64,
) -> Result<RegNet> {
    let n = pu.cover.patches.len();
    if nets.len() != n {
        return Err(Error::CoverMismatch("one net per patch required".into()));
    }
    let eps = &nets[0].eps_grid;
    for net in nets {
        if &net.eps_grid != eps {
            return Err(Error::Config("glued nets must share the eps grid".into()));
        }
    }
    // pairwise compatibility on overlap windows below the eps threshold
    for i in 0..n {
        for j in (i + 1)..n {
            let Some(overlap) = pu.cover.overlap(i, j) else { continue };
            let width = overlap.len(0);
            let w = BoxRegion {
                dim: overlap.dim,
                lo: [overlap.lo[0] + 0.3 * width, overlap.lo[1]],
                hi: [overlap.hi[0] - 0.3 * width, overlap.hi[1]],
            };
            for (k, &e) in eps.iter().enumerate() {
                let radius = nets[i].ops[k].radius.max(nets[j].ops[k].radius);
                if radius >= (0.3 * width).min(compat_max_radius) {
                    continue;
                }
                let a = nets[i].ops[k].apply_dist(probe)?;
                let b = nets[j].ops[k].apply_dist(probe)?;
                let d = a.sub(&b)?.sup_on(&w);
                let scale = a.sup_on(&w).max(1.0);
                if d > tol * scale {
                    return Err(Error::Incompatible(format!(
                        "patches {i},{j} disagree on their overlap at eps = {e} (defect {d:.3e})"
                    )));
                }
            }
        }
    }
    let grid = nets[0].grid.clone();
    let mut ops = Vec::with_capacity(eps.len());
    for k in 0..eps.len() {
        let mut acc: Option<RegOperator> = None;
        for i in 0..n {
            let part = nets[i].ops[k]
                .post_mul(pu.tau_cuts[i].clone())
                .post_mul(pu.etas[i].clone());
            acc = Some(match acc {
                None => part,
                Some(s) => s.plus(&part),
            });
        }
        ops.push(Arc::new(acc.unwrap()));
    }
    let kind = if nets.iter().all(|n| n.kind == NetKind::TestObject) {
        NetKind::TestObject
    } else if nets.iter().all(|n| n.kind == NetKind::ZeroTestObject) {
        NetKind::ZeroTestObject
    } else {
        NetKind::General
    };
    let mut out = RegNet {
        grid,
        eps_grid: eps.clone(),
        ops,
        kind,
        kind_certified: false,
        provenance: "glued".into(),
        localizing: None,
    };
    out.localizing = net_radius_cert(&out);
    Ok(out)
}

fn net_radius_cert(net: &RegNet) -> Option<crate::regularization::net::LocalizingCertificate> {
    let radii: Vec<(f64, f64)> = net
        .eps_grid
        .iter()
        .zip(&net.ops)
        .map(|(&e, op)| (e, op.radius))
        .collect();
    let mut shrinks = true;
    for w in radii.windows(2) {
        if w[0].0 > w[1].0 && w[1].1 > w[0].1 + 1e-12 {
            shrinks = false;
        }
    }
    Some(crate::regularization::net::LocalizingCertificate {
        radii,
        radius_shrinks: shrinks,
        far_probe_zero: false,
    })
}

/// Extension of a net from V to U, agreeing with the input on W: the blend
/// m o Phi o zeta + (1 - m) o donor, with m a plateau equal to 1 over W.
pub fn extend_net(
    net: &RegNet,
    w_box: &BoxRegion,
    v_box: &BoxRegion,
    donor: &RegNet,
    q: f64,
) -> Result<RegNet> {
    if net.eps_grid != donor.eps_grid {
        return Err(Error::Config("extension donor must share the eps grid".into()));
    }
    let margin = v_box.margin_around(w_box);
    if margin <= 0.0 {
        return Err(Error::DomainMismatch("W must sit strictly inside V".into()));
    }
    // m: 1 on a neighborhood of W, 0 outside a larger box still inside V
    let w0 = w_box.shrink(-0.25 * margin);
    let w1 = w_box.shrink(-0.75 * margin);
    let m = SmoothMask::plateau(&w0, &w1, q);
    let zeta = SmoothMask::plateau(&w1, v_box, q);
    let keep_kind = net.kind;
    let mut ops = Vec::with_capacity(net.len());
    for k in 0..net.len() {
        let masked = net.ops[k].pre_mul(zeta.clone()).post_mul(m.clone());
        let op = match keep_kind {
            NetKind::ZeroTestObject => masked,
            _ => {
                // donor - m o donor = (1 - m) o donor
                let d = donor.ops[k].as_ref();
                let dm = d.post_mul(m.clone()).scaled(Complex64::new(-1.0, 0.0));
                masked.plus(d).plus(&dm)
            }
        };
        ops.push(Arc::new(op));
    }
    let mut out = RegNet {
        grid: net.grid.clone(),
        eps_grid: net.eps_grid.clone(),
        ops,
        kind: keep_kind,
        kind_certified: false,
        provenance: format!("extend({})", net.provenance),
        localizing: None,
    };
    out.localizing = net_radius_cert(&out);
    Ok(out)
}

/// Restriction of an expression through a partition of unity.
pub fn restrict_expr(
    expr: &Arc<GFExpr>,
    target_domain: BoxRegion,
    pu: &PartitionOfUnity,
) -> Arc<GFExpr> {
    GFExpr::restricted(target_domain, pu.pieces(), expr)
}

/// Gluing of expressions over a cover; compatibility of the restrictions on
/// overlaps is checked through the quotient.
pub fn glue_exprs(
    pu: &PartitionOfUnity,
    exprs: &[Arc<GFExpr>],
    cfg: &RegimeConfig,
    check_compat: bool,
) -> Result<Arc<GFExpr>> {
    let n = pu.cover.patches.len();
    if exprs.len() != n {
        return Err(Error::CoverMismatch("one expression per patch required".into()));
    }
    if check_compat {
        for i in 0..n {
            for j in (i + 1)..n {
                let Some(overlap) = pu.cover.overlap(i, j) else { continue };
                let width = overlap.len(0);
                let mut probe = overlap;
                probe.lo[0] += 0.3 * width;
                probe.hi[0] -= 0.3 * width;
                let window = Window::new(pu.cover.domain, probe)?;
                let mut sub = overlap_config(cfg, window);
                let (ok, verdict) = equivalent(&exprs[i], &exprs[j], &mut sub)?;
                if !ok {
                    return Err(Error::Incompatible(format!(
                        "expressions {i},{j} differ on their overlap: {:?}",
                        verdict.classification
                    )));
                }
            }
        }
    }
    let mut pieces = Vec::with_capacity(n);
    let delta = 0.1 * pu.cover.domain.len(0) / n as f64;
    for i in 0..n {
        pieces.push(GluePiece {
            eta: pu.etas[i].clone(),
            tau_cut: pu.tau_cuts[i].clone(),
            op_restriction: pu.patch_restriction(i, delta),
            expr: exprs[i].clone(),
        });
    }
    Ok(GFExpr::glued(pu.cover.domain, pieces))
}

fn overlap_config(cfg: &RegimeConfig, window: Window) -> RegimeConfig {
    RegimeConfig {
        scale: cfg.scale.clone(),
        test_nets: cfg.test_nets.clone(),
        zero_nets: cfg.zero_nets.clone(),
        windows: vec![window],
        seminorms: cfg.seminorms.clone(),
        caps: cfg.caps,
        seed: cfg.seed,
        exec: cfg.exec,
    }
}

/// Composition with a sheaf morphism (multiplier of regime class).
pub fn apply_morphism_net(net: &RegNet, mask: &SmoothMask) -> RegNet {
    let mut out = net.map_ops(
        format!("morph({})", net.provenance),
        match net.kind {
            NetKind::ZeroTestObject => NetKind::ZeroTestObject,
            _ => NetKind::General,
        },
        |op| op.post_mul(mask.clone()),
    );
    out.kind_certified = false;
    out
}

pub fn apply_morphism_expr(expr: &Arc<GFExpr>, mask: &SmoothMask) -> Arc<GFExpr> {
    GFExpr::morph_apply(mask.clone(), expr)
}

/// Verdict stability across a restriction (used by scenario checks): the
/// classification of the restriction matches the original's.
pub fn restriction_verdict_stable(
    expr: &Arc<GFExpr>,
    restricted: &Arc<GFExpr>,
    cfg: &RegimeConfig,
) -> Result<(bool, Verdict, Verdict)> {
    let a = classify(expr, cfg)?;
    let b = classify(restricted, cfg)?;
    let same = a.is_negligible() == b.is_negligible() && a.is_moderate() == b.is_moderate();
    Ok((same, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::dist::DistributionRep;
    use crate::calculus::grid::{Grid, GridFunction};
    use crate::regularization::mollifier::MollifierParams;
    use crate::regularization::net::{build_mollifier_net, dyadic_eps, zero_net};

    /// Unit tests use a faster-shrinking radius net so support-arithmetic
    /// thresholds are reached within the short test eps grid; the canonical
    /// net exercises the same paths in the acceptance suite at deeper eps.
    fn setup() -> (Arc<Grid>, RegNet, Cover, PartitionOfUnity) {
        let domain = BoxRegion::new_1d(-4.0, 4.0);
        let grid = Grid::new(domain, 1 << 13).unwrap();
        let mut params = MollifierParams::distribution_default();
        params.rnet = crate::weights::RNet::power(0.5, 1.0);
        let net = build_mollifier_net(grid.clone(), &params, &dyadic_eps(2, 8)).unwrap();
        let cover = Cover::new_1d(domain, &[(-4.0, 1.6), (-1.6, 4.0)], 1.0).unwrap();
        let pu = PartitionOfUnity::build_1d(&cover, 1.0).unwrap();
        (grid, net, cover, pu)
    }

    #[test]
    fn partition_sums_to_one_exactly() {
        let (grid, _, _, pu) = setup();
        pu.verify(&grid).unwrap();
        assert!(pu.margin > 0.0);
    }

    #[test]
    fn cover_rejects_gaps_and_thin_overlaps() {
        let domain = BoxRegion::new_1d(-4.0, 4.0);
        assert!(Cover::new_1d(domain, &[(-4.0, -1.0), (0.0, 4.0)], 0.5).is_err());
        assert!(Cover::new_1d(domain, &[(-4.0, 0.1), (0.0, 4.0)], 0.5).is_err());
    }

    #[test]
    fn restriction_agrees_with_original_below_threshold() {
        // Lemma shape (iii): rho_W o rho(Phi) o rho_V = rho_W o Phi for eps small
        let (grid, net, _, pu) = setup();
        let restricted = restrict_net(&net, &pu).unwrap();
        let eps0 = pu.eps_threshold(&net).unwrap();
        let u = DistributionRep::delta(grid.clone(), [0.0, 0.0])
            .plus(&DistributionRep::heaviside(grid.clone(), 0, 0.3))
            .unwrap();
        let w = BoxRegion::new_1d(-2.2, 2.2);
        for (k, &e) in net.eps_grid.iter().enumerate() {
            if e > eps0 {
                continue;
            }
            let a = net.ops[k].apply_dist(&u).unwrap();
            let b = restricted.ops[k].apply_dist(&u).unwrap();
            let d = a.sub(&b).unwrap().sup_on(&w);
            assert!(d <= 1e-8 * a.sup_on(&w).max(1.0), "eps={e}: defect {d}");
        }
    }

    #[test]
    fn restriction_sends_agreeing_ops_to_agreeing_ops() {
        // Lemma shape (iv)
        let (grid, net, _, pu) = setup();
        let w = BoxRegion::new_1d(-1.5, 1.5);
        // junk supported away from W
        let far = SmoothMask::plateau(
            &BoxRegion::new_1d(2.8, 3.6),
            &BoxRegion::new_1d(2.4, 3.9),
            1.0,
        );
        let op1 = net.ops[2].as_ref().clone();
        let op2 = op1.plus(&op1.post_mul(far));
        let pieces = pu.pieces();
        let r1 = crate::basic_space::restrict_operator(&op1, &pieces);
        let r2 = crate::basic_space::restrict_operator(&op2, &pieces);
        let u = DistributionRep::delta(grid, [0.2, 0.0]);
        let a = r1.apply_dist(&u).unwrap();
        let b = r2.apply_dist(&u).unwrap();
        let d = a.sub(&b).unwrap().sup_on(&w);
        assert!(d <= 1e-10 * a.sup_on(&w).max(1.0), "defect {d}");
    }

    #[test]
    fn restricting_the_zero_net_gives_zero() {
        let (grid, _, _, pu) = setup();
        let z = zero_net(grid.clone(), &dyadic_eps(2, 8));
        let r = restrict_net(&z, &pu).unwrap();
        let u = DistributionRep::delta(grid, [0.0, 0.0]);
        for op in &r.ops {
            assert_eq!(op.apply_dist(&u).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn glue_of_restrictions_recovers_global_net() {
        let (grid, net, _, pu) = setup();
        // restrict the global net to each patch through its single-piece
        // patch restriction, then glue back
        let delta = 0.4;
        let mut patch_nets = Vec::new();
        for i in 0..pu.cover.patches.len() {
            let pieces = pu.patch_restriction(i, delta);
            let mut r = net.map_ops(format!("patch-{i}"), net.kind, |op| {
                crate::basic_space::restrict_operator(op, &pieces)
            });
            r.kind_certified = net.kind_certified;
            patch_nets.push(r);
        }
        let refs: Vec<&RegNet> = patch_nets.iter().collect();
        let probe = DistributionRep::delta(grid.clone(), [0.0, 0.0]);
        let glued = glue_nets(&pu, &refs, &probe, 1e-6, 0.9 * delta).unwrap();
        let eps0 = pu.eps_threshold(&net).unwrap();
        let w = BoxRegion::new_1d(-2.0, 2.0);
        let u = DistributionRep::heaviside(grid, 0, 0.1);
        let mut checked = 0;
        for (k, &e) in net.eps_grid.iter().enumerate() {
            // both the outer partition margin and the patch-restriction
            // chain must clear the localization radius
            if e > eps0 || net.ops[k].radius >= 0.95 * delta {
                continue;
            }
            let a = net.ops[k].apply_dist(&u).unwrap();
            let b = glued.ops[k].apply_dist(&u).unwrap();
            let d = a.sub(&b).unwrap().sup_on(&w);
            assert!(d <= 1e-8 * a.sup_on(&w).max(1.0), "eps={e}: defect {d}");
            checked += 1;
        }
        assert!(checked >= 3, "threshold admits too few eps values");
    }

    #[test]
    fn glue_with_equal_nets_is_convex_combination() {
        let (grid, net, _, pu) = setup();
        let probe = DistributionRep::delta(grid.clone(), [0.0, 0.0]);
        let glued = glue_nets(&pu, &[&net, &net], &probe, 1e-8, f64::INFINITY).unwrap();
        // on eta plateaus the glued operator equals the input exactly
        let u = DistributionRep::heaviside(grid, 0, -0.2);
        let k = 4;
        let a = net.ops[k].apply_dist(&u).unwrap();
        let b = glued.ops[k].apply_dist(&u).unwrap();
        // plateau region of eta_0, away from its transition at (-0.16, 0.16)
        let plateau = BoxRegion::new_1d(-2.0, -1.0);
        let d = a.sub(&b).unwrap().sup_on(&plateau);
        assert!(d <= 1e-12 * a.max_abs(), "plateau defect {d}");
    }

    #[test]
    fn incompatible_nets_are_rejected() {
        let (grid, net, _, pu) = setup();
        let scaled = net.map_ops("scaled", net.kind, |op| {
            op.scaled(Complex64::new(2.0, 0.0))
        });
        let probe = DistributionRep::delta(grid, [0.0, 0.0]);
        match glue_nets(&pu, &[&net, &scaled], &probe, 1e-6, f64::INFINITY) {
            Err(Error::Incompatible(msg)) => assert!(msg.contains("overlap")),
            other => panic!("expected incompatibility, got {other:?}"),
        }
    }

    #[test]
    fn extension_agrees_on_the_inner_box() {
        let (grid, net, _, _) = setup();
        let w_box = BoxRegion::new_1d(-1.0, 1.0);
        let v_box = BoxRegion::new_1d(-2.5, 2.5);
        let mut donor = build_mollifier_net(
            grid.clone(),
            &MollifierParams::distribution_default(),
            &net.eps_grid,
        )
        .unwrap();
        donor.kind = NetKind::TestObject;
        let extended = extend_net(&net, &w_box, &v_box, &donor, 1.0).unwrap();
        let u = DistributionRep::delta(grid, [0.3, 0.0]);
        for (k, &e) in net.eps_grid.iter().enumerate() {
            if extended.ops[k].radius >= 0.2 {
                continue;
            }
            let a = net.ops[k].apply_dist(&u).unwrap();
            let b = extended.ops[k].apply_dist(&u).unwrap();
            let d = a.sub(&b).unwrap().sup_on(&w_box);
            assert!(d <= 1e-8 * a.sup_on(&w_box).max(1.0), "eps={e} defect {d}");
        }
    }

    #[test]
    fn morphism_with_unit_mask_is_identity() {
        let (grid, net, _, _) = setup();
        let one = SmoothMask::one(1);
        let m = apply_morphism_net(&net, &one);
        let u = DistributionRep::delta(grid, [0.0, 0.0]);
        let a = net.ops[3].apply_dist(&u).unwrap();
        let b = m.ops[3].apply_dist(&u).unwrap();
        assert_eq!(a.sub(&b).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn morphism_vanishing_mask_kills_the_output() {
        let (grid, net, _, _) = setup();
        let mask = SmoothMask::plateau(
            &BoxRegion::new_1d(2.0, 3.0),
            &BoxRegion::new_1d(1.5, 3.5),
            1.0,
        );
        let m = apply_morphism_net(&net, &mask);
        let u = DistributionRep::delta(grid, [0.0, 0.0]);
        let out = m.ops[3].apply_dist(&u).unwrap();
        // mask is 0 on [-1, 1]
        let w = BoxRegion::new_1d(-1.0, 1.0);
        assert_eq!(out.sup_on(&w), 0.0);
    }

    #[test]
    fn partition_reconstruction_is_exact_on_grid() {
        // sum_i eta_i * R(Phi) = R(Phi) as grid values over the domain
        let (grid, net, _, pu) = setup();
        let u = DistributionRep::heaviside(grid.clone(), 0, 0.0);
        let base = net.ops[3].apply_dist(&u).unwrap();
        let mut acc = GridFunction::zero(grid.clone());
        for eta in &pu.etas {
            acc = acc.add(&base.mul(&eta.samples(&grid)).unwrap()).unwrap();
        }
        let mut worst = 0.0f64;
        for idx in 0..grid.total_points() {
            let p = grid.point(idx);
            if pu.cover.domain.contains(&p[..1]) {
                worst = worst.max((acc.data[idx] - base.data[idx]).norm());
            }
        }
        assert!(worst <= 1e-12 * base.max_abs().max(1.0));
    }

    #[test]
    fn locality_of_eval_on_probe_windows() {
        // operators equal after restriction to V evaluate equally on V,
        // differentials included
        let (grid, net, _, _) = setup();
        let v = BoxRegion::new_1d(-2.0, 2.0);
        let op1 = net.ops[3].as_ref();
        let far = SmoothMask::plateau(
            &BoxRegion::new_1d(3.0, 3.5),
            &BoxRegion::new_1d(2.7, 3.8),
            1.0,
        );
        let op2 = op1.plus(&op1.post_mul(far));
        let domain = BoxRegion::new_1d(-4.0, 4.0);
        let u = DistributionRep::heaviside(grid.clone(), 0, 0.0);
        let e = GFExpr::prod(
            &GFExpr::iota(domain, u.clone()),
            &GFExpr::iota(domain, u),
        )
        .unwrap();
        let a = crate::basic_space::eval(&e, op1).unwrap();
        let b = crate::basic_space::eval(&e, &op2).unwrap();
        let d0 = a.sub(&b).unwrap().sup_on(&v);
        assert!(d0 <= 1e-10 * a.sup_on(&v).max(1.0));
        let dir = net.ops[5].as_ref();
        let da = crate::basic_space::differential(&e, op1, &[dir]).unwrap();
        let db = crate::basic_space::differential(&e, &op2, &[dir]).unwrap();
        let d1 = da.sub(&db).unwrap().sup_on(&v);
        assert!(d1 <= 1e-10 * da.sup_on(&v).max(1.0));
    }
}
