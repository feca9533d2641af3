//! Closed-form smooth plateau functions.
//!
//! These are the cutoffs, partition-of-unity multipliers and mollifier
//! profiles: identically 0 / 1 outside closed-form transition intervals, so
//! support arithmetic stays exact. Transitions are built from the pieces
//! exp(-u^{-q}) and give Gevrey class s = 1 + 1/q; q = 1 is the classic
//! smooth plateau.

use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::grid::{BoxRegion, Grid, GridFunction};

/// Transition profile exp(-u^{-q}) based smoothstep on [0, 1].
pub fn smoothstep(u: f64, q: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let f = |t: f64| (-t.powf(-q)).exp();
        let a = f(u);
        let b = f(1.0 - u);
        a / (a + b)
    }
}

/// One axis of a plateau mask: optional rising edge, optional falling edge.
#[derive(Debug, Clone)]
pub struct Mask1D {
    /// rises from 0 to 1 over this interval; None means starts at 1
    pub up: Option<(f64, f64)>,
    /// falls from 1 to 0 over this interval; None means stays at 1
    pub down: Option<(f64, f64)>,
    /// transition exponent q (Gevrey order 1 + 1/q)
    pub q: f64,
}

impl Mask1D {
    pub fn one() -> Mask1D {
        Mask1D {
            up: None,
            down: None,
            q: 1.0,
        }
    }

    /// 1 on [lo1, hi1], 0 outside (lo0, hi0).
    pub fn plateau(lo0: f64, lo1: f64, hi1: f64, hi0: f64, q: f64) -> Mask1D {
        assert!(lo0 < lo1 && lo1 <= hi1 && hi1 < hi0);
        Mask1D {
            up: Some((lo0, lo1)),
            down: Some((hi1, hi0)),
            q,
        }
    }

    /// 0 before lo, 1 after hi.
    pub fn ramp_up(lo: f64, hi: f64, q: f64) -> Mask1D {
        Mask1D {
            up: Some((lo, hi)),
            down: None,
            q,
        }
    }

    /// 1 before lo, 0 after hi.
    pub fn ramp_down(lo: f64, hi: f64, q: f64) -> Mask1D {
        Mask1D {
            up: None,
            down: Some((lo, hi)),
            q,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut v = 1.0;
        if let Some((lo, hi)) = self.up {
            v *= smoothstep((x - lo) / (hi - lo), self.q);
        }
        if let Some((lo, hi)) = self.down {
            v *= 1.0 - smoothstep((x - lo) / (hi - lo), self.q);
        }
        v
    }

    pub fn is_one_on(&self, a: f64, b: f64) -> bool {
        let up_ok = self.up.map(|(_, hi)| a >= hi).unwrap_or(true);
        let down_ok = self.down.map(|(lo, _)| b <= lo).unwrap_or(true);
        up_ok && down_ok
    }

    pub fn is_zero_on(&self, a: f64, b: f64) -> bool {
        let below = self.up.map(|(lo, _)| b <= lo).unwrap_or(false);
        let above = self.down.map(|(_, hi)| a >= hi).unwrap_or(false);
        below || above
    }

    /// Interval outside which the mask vanishes (None bound = unbounded).
    pub fn support(&self) -> (Option<f64>, Option<f64>) {
        (self.up.map(|(lo, _)| lo), self.down.map(|(_, hi)| hi))
    }
}

/// Tensor-product plateau mask in d dimensions with closed-form evaluation
/// and exact constant-region queries.
#[derive(Debug, Clone)]
pub struct SmoothMask {
    pub axes: Vec<Mask1D>,
}

impl SmoothMask {
    pub fn one(dim: usize) -> SmoothMask {
        SmoothMask {
            axes: vec![Mask1D::one(); dim],
        }
    }

    /// Plateau mask: 1 on `core`, 0 outside `support`, transitions between.
    pub fn plateau(core: &BoxRegion, support: &BoxRegion, q: f64) -> SmoothMask {
        let axes = (0..core.dim)
            .map(|a| Mask1D::plateau(support.lo[a], core.lo[a], core.hi[a], support.hi[a], q))
            .collect();
        SmoothMask { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.axes.iter().zip(x).map(|(m, &xi)| m.eval(xi)).product()
    }

    pub fn is_one_on(&self, region: &BoxRegion) -> bool {
        self.axes
            .iter()
            .enumerate()
            .all(|(a, m)| m.is_one_on(region.lo[a], region.hi[a]))
    }

    pub fn is_zero_on(&self, region: &BoxRegion) -> bool {
        self.axes
            .iter()
            .enumerate()
            .any(|(a, m)| m.is_zero_on(region.lo[a], region.hi[a]))
    }

    pub fn samples(&self, grid: &Arc<Grid>) -> GridFunction {
        GridFunction::from_fn(grid.clone(), |x| Complex64::new(self.eval(x), 0.0))
    }
}

/// A product of plateau masks: the closure of the mask family under the
/// multiplications that cutoffs and partitions of unity perform.
#[derive(Debug, Clone, Default)]
pub struct MaskProduct {
    pub factors: Vec<SmoothMask>,
}

impl MaskProduct {
    pub fn single(mask: SmoothMask) -> MaskProduct {
        MaskProduct {
            factors: vec![mask],
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.factors.iter().map(|m| m.eval(x)).product()
    }

    pub fn push(&mut self, mask: SmoothMask) {
        self.factors.push(mask);
    }

    pub fn is_one_on(&self, region: &BoxRegion) -> bool {
        self.factors.iter().all(|m| m.is_one_on(region))
    }

    pub fn is_zero_on(&self, region: &BoxRegion) -> bool {
        self.factors.iter().any(|m| m.is_zero_on(region))
    }

    pub fn samples(&self, grid: &Arc<Grid>) -> GridFunction {
        GridFunction::from_fn(grid.clone(), |x| Complex64::new(self.eval(x), 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_endpoints_and_symmetry() {
        assert_eq!(smoothstep(-0.1, 1.0), 0.0);
        assert_eq!(smoothstep(1.1, 1.0), 1.0);
        for &u in &[0.1, 0.25, 0.5, 0.9] {
            let s = smoothstep(u, 1.0) + smoothstep(1.0 - u, 1.0);
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn plateau_exact_regions() {
        let m = Mask1D::plateau(-2.0, -1.0, 1.0, 2.0, 1.0);
        assert_eq!(m.eval(-3.0), 0.0);
        assert_eq!(m.eval(0.0), 1.0);
        assert_eq!(m.eval(1.0), 1.0);
        assert_eq!(m.eval(2.5), 0.0);
        assert!(m.eval(1.5) > 0.0 && m.eval(1.5) < 1.0);
        assert!(m.is_one_on(-1.0, 1.0));
        assert!(!m.is_one_on(-1.5, 1.0));
        assert!(m.is_zero_on(2.0, 3.0));
    }

    #[test]
    fn gevrey_transition_is_flatter_near_edges()  {
        // larger q pushes the transition mass away from the endpoints
        let near_zero_q1 = smoothstep(0.1, 1.0);
        let near_zero_q2 = smoothstep(0.1, 2.0);
        assert!(near_zero_q2 < near_zero_q1);
    }

    #[test]
    fn mask_product_queries() {
        let a = SmoothMask::plateau(
            &BoxRegion::new_1d(-1.0, 1.0),
            &BoxRegion::new_1d(-2.0, 2.0),
            1.0,
        );
        let b = SmoothMask::plateau(
            &BoxRegion::new_1d(-0.5, 3.0),
            &BoxRegion::new_1d(-1.5, 4.0),
            1.0,
        );
        let mut p = MaskProduct::single(a);
        p.push(b);
        assert!(p.is_one_on(&BoxRegion::new_1d(-0.5, 1.0)));
        assert!(!p.is_one_on(&BoxRegion::new_1d(-1.0, 1.0)));
        assert!(p.is_zero_on(&BoxRegion::new_1d(2.5, 3.0)));
        let x = [0.7];
        assert!((p.eval(&x) - 1.0).abs() < 1e-15);
    }
}
