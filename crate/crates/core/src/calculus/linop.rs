//! Linear operators T mapping distributions to distributions and smooth
//! functions to smooth functions: partial derivatives, smooth multipliers,
//! and first-order combinations a(x) d/dx_i + b(x).

use std::sync::Arc;

use crate::calculus::coeff::SmoothCoeff;
use crate::calculus::dist::DistributionRep;
use crate::calculus::grid::{Grid, GridFunction, Window};
use crate::calculus::seminorm::{seminorm, SeminormSpec};
use crate::error::Result;

#[derive(Debug, Clone)]
pub enum LinOpSpec {
    Identity,
    PartialDerivative { axis: usize },
    Multiplier { omega: SmoothCoeff },
    /// a(x) d/dx_axis + b(x)
    FirstOrder {
        axis: usize,
        a: SmoothCoeff,
        b: SmoothCoeff,
    },
}

impl LinOpSpec {
    pub fn describe(&self) -> String {
        match self {
            LinOpSpec::Identity => "id".into(),
            LinOpSpec::PartialDerivative { axis } => format!("d/dx{axis}"),
            LinOpSpec::Multiplier { .. } => "multiplier".into(),
            LinOpSpec::FirstOrder { axis, .. } => format!("a(x) d/dx{axis} + b(x)"),
        }
    }

    pub fn apply_grid(&self, f: &GridFunction) -> Result<GridFunction> {
        match self {
            LinOpSpec::Identity => Ok(f.clone()),
            LinOpSpec::PartialDerivative { axis } => Ok(f.derivative(*axis, 1)),
            LinOpSpec::Multiplier { omega } => f.mul(&omega.samples(&f.grid)),
            LinOpSpec::FirstOrder { axis, a, b } => {
                let da = f.derivative(*axis, 1).mul(&a.samples(&f.grid))?;
                let mb = f.mul(&b.samples(&f.grid))?;
                da.add(&mb)
            }
        }
    }

    pub fn apply_dist(&self, u: &DistributionRep) -> Result<DistributionRep> {
        match self {
            LinOpSpec::Identity => Ok(u.clone()),
            LinOpSpec::PartialDerivative { axis } => u.derivative(*axis),
            LinOpSpec::Multiplier { omega } => u.multiplied(omega),
            LinOpSpec::FirstOrder { axis, a, b } => {
                let da = u.derivative(*axis)?.multiplied(a)?;
                let mb = u.multiplied(b)?;
                da.plus(&mb)
            }
        }
    }

    /// Regime class check for the coefficients: each one must have finite
    /// regime seminorm on every probe window (evaluated up to the derivative
    /// cap) with resolved spectrum.
    pub fn check_class(
        &self,
        grid: &Arc<Grid>,
        windows: &[Window],
        spec: &SeminormSpec,
    ) -> Result<()> {
        let coeffs: Vec<&SmoothCoeff> = match self {
            LinOpSpec::Identity | LinOpSpec::PartialDerivative { .. } => vec![],
            LinOpSpec::Multiplier { omega } => vec![omega],
            LinOpSpec::FirstOrder { a, b, .. } => vec![a, b],
        };
        for c in coeffs {
            let samples = c.samples(grid);
            for w in windows {
                let v = seminorm(&samples, w, spec)?;
                if !v.value.is_finite() {
                    return Err(crate::error::Error::ClassViolation(format!(
                        "coefficient seminorm diverges on window {:?}",
                        w.probe
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::dist::{pair, Atom};
    use crate::calculus::grid::BoxRegion;

    fn grid() -> Arc<Grid> {
        Grid::new(BoxRegion::new_1d(-4.0, 4.0), 1 << 13).unwrap()
    }

    #[test]
    fn derivative_of_heaviside_is_delta() {
        let g = grid();
        let u = DistributionRep::heaviside(g, 0, 0.0);
        let op = LinOpSpec::PartialDerivative { axis: 0 };
        let du = op.apply_dist(&u).unwrap();
        assert!(matches!(du.atoms[0], Atom::Dirac { .. }));
    }

    #[test]
    fn multiplier_times_delta_picks_point_value() {
        let g = grid();
        let omega = SmoothCoeff::cos(0, 1.0, 2.0);
        let u = DistributionRep::delta(g.clone(), [0.0, 0.0]);
        let op = LinOpSpec::Multiplier { omega };
        let mu = op.apply_dist(&u).unwrap();
        // omega(0) * delta: pair against a probe and compare
        let w = Window::new(BoxRegion::new_1d(-4.0, 4.0), BoxRegion::new_1d(-2.0, 2.0)).unwrap();
        let phi = GridFunction::from_real_fn(g, |x| (-x[0] * x[0] / 0.08).exp());
        let lhs = pair(&mu, &phi, &w).unwrap();
        let rhs = 2.0 * pair(&u, &phi, &w).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn x_d_dx_on_sine_matches_closed_form() {
        let g = grid();
        let k = 2.0 * std::f64::consts::PI / 12.0 * 6.0;
        let f = GridFunction::from_real_fn(g.clone(), move |x| (k * x[0]).sin());
        let op = LinOpSpec::FirstOrder {
            axis: 0,
            a: SmoothCoeff::Coord { axis: 0 },
            b: SmoothCoeff::Const(0.0),
        };
        let out = op.apply_grid(&f).unwrap();
        let expect = GridFunction::from_real_fn(g, move |x| x[0] * k * (k * x[0]).cos());
        let err = out.sub(&expect).unwrap().max_abs();
        assert!(err <= 1e-8 * k, "error {err}");
    }
}
