//! Closed-form smooth coefficient functions: multipliers and first-order
//! operator coefficients, with pointwise derivatives for the formal atom
//! calculus.

use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::grid::{Grid, GridFunction};
use crate::calculus::mask::SmoothMask;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum SmoothCoeff {
    Const(f64),
    /// the coordinate x_axis
    Coord { axis: usize },
    /// amp * sin(freq * x_axis + phase)
    Sin {
        axis: usize,
        freq: f64,
        amp: f64,
        phase: f64,
    },
    /// amp * exp(-|x - center|^2 / (2 sigma^2))
    Gaussian {
        center: [f64; 2],
        sigma: f64,
        amp: f64,
    },
    /// closed-form plateau mask
    Mask(SmoothMask),
    /// 1 - mask, the complementary multiplier of a partition piece
    MaskComplement(SmoothMask),
}

impl SmoothCoeff {
    pub fn cos(axis: usize, freq: f64, amp: f64) -> SmoothCoeff {
        SmoothCoeff::Sin {
            axis,
            freq,
            amp,
            phase: std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SmoothCoeff::Const(c) => *c,
            SmoothCoeff::Coord { axis } => x[*axis],
            SmoothCoeff::Sin {
                axis,
                freq,
                amp,
                phase,
            } => amp * (freq * x[*axis] + phase).sin(),
            SmoothCoeff::Gaussian { center, sigma, amp } => {
                let mut q = 0.0;
                for (a, &xi) in x.iter().enumerate() {
                    let d = xi - center[a];
                    q += d * d;
                }
                amp * (-q / (2.0 * sigma * sigma)).exp()
            }
            SmoothCoeff::Mask(m) => m.eval(x),
            SmoothCoeff::MaskComplement(m) => 1.0 - m.eval(x),
        }
    }

    /// Mixed partial derivative at a point; per-axis orders in `order`.
    pub fn deriv_at(&self, x: &[f64], order: &[usize; 2]) -> Result<f64> {
        if order[0] + order[1] == 0 {
            return Ok(self.eval(x));
        }
        match self {
            SmoothCoeff::Const(_) => Ok(0.0),
            SmoothCoeff::Coord { axis } => {
                let m = order[*axis];
                let other = order[1 - *axis];
                Ok(if m == 1 && other == 0 { 1.0 } else { 0.0 })
            }
            SmoothCoeff::Sin {
                axis,
                freq,
                amp,
                phase,
            } => {
                if order[1 - *axis] > 0 {
                    return Ok(0.0);
                }
                let m = order[*axis] as f64;
                Ok(amp
                    * freq.powi(order[*axis] as i32)
                    * (freq * x[*axis] + phase + m * std::f64::consts::FRAC_PI_2).sin())
            }
            SmoothCoeff::Gaussian { center, sigma, amp } => {
                // separable: product of 1D Hermite-weighted gaussians per axis
                let mut v = *amp;
                for a in 0..x.len() {
                    let u = x[a] - center[a];
                    v *= gaussian_deriv_1d(u, *sigma, order[a]);
                }
                Ok(v)
            }
            SmoothCoeff::Mask(m) => {
                if order[0] + order[1] > 4 {
                    return Err(Error::ClassViolation(
                        "mask coefficient derivatives supported up to order 4".into(),
                    ));
                }
                Ok(mask_deriv(m, x, order))
            }
            SmoothCoeff::MaskComplement(m) => {
                if order[0] + order[1] > 4 {
                    return Err(Error::ClassViolation(
                        "mask coefficient derivatives supported up to order 4".into(),
                    ));
                }
                Ok(-mask_deriv(m, x, order))
            }
        }
    }

    pub fn samples(&self, grid: &Arc<Grid>) -> GridFunction {
        GridFunction::from_fn(grid.clone(), |x| Complex64::new(self.eval(x), 0.0))
    }
}

/// d^m/du^m exp(-u^2/(2 s^2)) via the Hermite recursion.
fn gaussian_deriv_1d(u: f64, s: f64, m: usize) -> f64 {
    let g = (-u * u / (2.0 * s * s)).exp();
    if m == 0 {
        return g;
    }
    // p_{m}(u): d^m g = p_m(u) g with p_0 = 1, p_{m+1} = p_m' - u/s^2 p_m
    // evaluate by recursing on (value, derivative) pairs numerically is messy;
    // use probabilists' Hermite: d^m e^{-u^2/2s^2} = (-1/s)^m He_m(u/s) e^{-u^2/2s^2}
    let t = u / s;
    let mut he_prev = 1.0; // He_0
    let mut he = t; // He_1
    if m == 1 {
        return (-1.0 / s) * he * g;
    }
    for k in 1..m {
        let next = t * he - k as f64 * he_prev;
        he_prev = he;
        he = next;
    }
    (-1.0 / s).powi(m as i32) * he * g
}

/// High-order central stencil for mask derivatives (9-point, order 8).
/// Constant stretches are detected from the closed form first, so plateau
/// interiors give exact zeros.
fn mask_deriv(m: &SmoothMask, x: &[f64], order: &[usize; 2]) -> f64 {
    let h = 1e-3;
    for (a, m1) in m.axes.iter().enumerate() {
        if order[a] == 0 {
            continue;
        }
        let reach = 4.0 * h * order[a] as f64;
        let lo = x[a] - reach;
        let hi = x[a] + reach;
        if m1.is_one_on(lo, hi) || m1.is_zero_on(lo, hi) {
            return 0.0;
        }
    }
    mask_deriv_stencil(m, x, order)
}

fn mask_deriv_stencil(m: &SmoothMask, x: &[f64], order: &[usize; 2]) -> f64 {
    fn d1(f: &dyn Fn(f64) -> f64, x: f64, m: usize, h: f64) -> f64 {
        if m == 0 {
            return f(x);
        }
        // first derivative, 9-point
        let c = [
            3.0 / 840.0,
            -32.0 / 840.0,
            168.0 / 840.0,
            -672.0 / 840.0,
            0.0,
            672.0 / 840.0,
            -168.0 / 840.0,
            32.0 / 840.0,
            -3.0 / 840.0,
        ];
        let g = |y: f64| d1(f, y, m - 1, h);
        let mut acc = 0.0;
        for (i, ci) in c.iter().enumerate() {
            if *ci != 0.0 {
                acc += ci * g(x + (i as f64 - 4.0) * h);
            }
        }
        acc / h
    }
    let h = 1e-3;
    match (order[0], order[1]) {
        (m0, 0) => {
            let f = |t: f64| {
                let mut y = [x[0], if x.len() > 1 { x[1] } else { 0.0 }];
                y[0] = t;
                m.eval(&y[..x.len()])
            };
            d1(&f, x[0], m0, h)
        }
        (0, m1) => {
            let f = |t: f64| {
                let y = [x[0], t];
                m.eval(&y)
            };
            d1(&f, x[1], m1, h)
        }
        (m0, m1) => {
            // mixed: tensor structure of the mask factorizes the derivative
            let fx = |t: f64| m.axes[0].eval(t);
            let fy = |t: f64| m.axes[1].eval(t);
            d1(&fx, x[0], m0, h) * d1(&fy, x[1], m1, h)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::grid::BoxRegion;

    #[test]
    fn sin_derivatives() {
        let c = SmoothCoeff::Sin {
            axis: 0,
            freq: 2.0,
            amp: 3.0,
            phase: 0.0,
        };
        let x = [0.7, 0.0];
        assert!((c.deriv_at(&x, &[1, 0]).unwrap() - 6.0 * (1.4f64).cos()).abs() < 1e-12);
        assert!((c.deriv_at(&x, &[2, 0]).unwrap() + 12.0 * (1.4f64).sin()).abs() < 1e-12);
        assert_eq!(c.deriv_at(&x, &[0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_derivatives_match_finite_differences() {
        let c = SmoothCoeff::Gaussian {
            center: [0.3, 0.0],
            sigma: 0.5,
            amp: 2.0,
        };
        let x = [0.9];
        let h = 1e-5;
        let fd = (c.eval(&[x[0] + h]) - c.eval(&[x[0] - h])) / (2.0 * h);
        assert!((c.deriv_at(&x, &[1, 0]).unwrap() - fd).abs() < 1e-8);
        let fd2 = (c.eval(&[x[0] + h]) - 2.0 * c.eval(&x) + c.eval(&[x[0] - h])) / (h * h);
        assert!((c.deriv_at(&x, &[2, 0]).unwrap() - fd2).abs() < 1e-5);
    }

    #[test]
    fn mask_derivative_vanishes_on_plateau() {
        let m = SmoothMask::plateau(
            &BoxRegion::new_1d(-1.0, 1.0),
            &BoxRegion::new_1d(-2.0, 2.0),
            1.0,
        );
        let c = SmoothCoeff::Mask(m);
        assert_eq!(c.deriv_at(&[0.0], &[1, 0]).unwrap(), 0.0);
        // nonzero inside the transition
        assert!(c.deriv_at(&[1.5], &[1, 0]).unwrap().abs() > 1e-3);
    }
}
