//! Real-analytic diffeomorphism catalog with forward/inverse evaluation and
//! actions on smooth functions and distribution atoms.
//!
//! Distributions transport as volume densities: the pairing is preserved,
//! <mu(u), phi> = <u, phi o mu>, so Dirac masses keep their coefficients and
//! densities pick up the inverse Jacobian.

use num_complex::Complex64;

use crate::calculus::dist::{Atom, DistributionRep, Envelope};
use crate::calculus::grid::GridFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum Diffeo1D {
    Identity,
    /// x -> a x + b, a > 0
    Affine { a: f64, b: f64 },
    /// x -> x + amp sin x, |amp| < 1
    SinePerturb { amp: f64 },
    /// x -> x + amp tanh x, amp > -1
    TanhStretch { amp: f64 },
}

impl Diffeo1D {
    pub fn forward(&self, x: f64) -> f64 {
        match self {
            Diffeo1D::Identity => x,
            Diffeo1D::Affine { a, b } => a * x + b,
            Diffeo1D::SinePerturb { amp } => x + amp * x.sin(),
            Diffeo1D::TanhStretch { amp } => x + amp * x.tanh(),
        }
    }

    pub fn d_forward(&self, x: f64) -> f64 {
        match self {
            Diffeo1D::Identity => 1.0,
            Diffeo1D::Affine { a, .. } => *a,
            Diffeo1D::SinePerturb { amp } => 1.0 + amp * x.cos(),
            Diffeo1D::TanhStretch { amp } => {
                let s = x.cosh();
                1.0 + amp / (s * s)
            }
        }
    }

    pub fn d2_forward(&self, x: f64) -> f64 {
        match self {
            Diffeo1D::Identity | Diffeo1D::Affine { .. } => 0.0,
            Diffeo1D::SinePerturb { amp } => -amp * x.sin(),
            Diffeo1D::TanhStretch { amp } => {
                let t = x.tanh();
                let s = x.cosh();
                -2.0 * amp * t / (s * s)
            }
        }
    }

    /// Newton inversion with analytic seed; the catalog maps are strictly
    /// increasing so convergence is unconditional.
    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            Diffeo1D::Identity => y,
            Diffeo1D::Affine { a, b } => (y - b) / a,
            _ => {
                let mut x = y;
                for _ in 0..100 {
                    let r = self.forward(x) - y;
                    if r.abs() < 1e-14 * (1.0 + y.abs()) {
                        break;
                    }
                    x -= r / self.d_forward(x);
                }
                x
            }
        }
    }
}

/// Separable diffeomorphism of the computational box.
#[derive(Debug, Clone)]
pub struct Diffeo {
    pub axes: Vec<Diffeo1D>,
    pub name: String,
}

impl Diffeo {
    pub fn identity(dim: usize) -> Diffeo {
        Diffeo {
            axes: vec![Diffeo1D::Identity; dim],
            name: "id".into(),
        }
    }

    pub fn new_1d(map: Diffeo1D, name: impl Into<String>) -> Diffeo {
        Diffeo {
            axes: vec![map],
            name: name.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn forward(&self, x: &[f64]) -> [f64; 2] {
        let mut y = [0.0; 2];
        for (a, m) in self.axes.iter().enumerate() {
            y[a] = m.forward(x[a]);
        }
        y
    }

    pub fn inverse(&self, y: &[f64]) -> [f64; 2] {
        let mut x = [0.0; 2];
        for (a, m) in self.axes.iter().enumerate() {
            x[a] = m.inverse(y[a]);
        }
        x
    }

    pub fn jacobian_det(&self, x: &[f64]) -> f64 {
        self.axes
            .iter()
            .enumerate()
            .map(|(a, m)| m.d_forward(x[a]))
            .product()
    }

    /// Smooth pushforward f -> f o mu^{-1}; zero where the preimage leaves
    /// the computational box.
    pub fn act_smooth(&self, f: &GridFunction) -> GridFunction {
        self.compose_with(f, false)
    }

    /// Smooth pullback f -> f o mu.
    pub fn pull_smooth(&self, f: &GridFunction) -> GridFunction {
        self.compose_with(f, true)
    }

    fn compose_with(&self, f: &GridFunction, pull: bool) -> GridFunction {
        let g = f.grid.clone();
        let dim = g.dim;
        let mut data = Vec::with_capacity(g.total_points());
        for idx in 0..g.total_points() {
            let y = g.point(idx);
            let x = if pull {
                self.forward(&y[..dim])
            } else {
                self.inverse(&y[..dim])
            };
            let inside = (0..dim).all(|a| x[a] >= g.comp.lo[a] && x[a] <= g.comp.hi[a]);
            data.push(if inside {
                f.interp8(&x[..dim])
            } else {
                Complex64::new(0.0, 0.0)
            });
        }
        GridFunction { grid: g, data }
    }

    /// Density pushforward of a distribution: pairing values preserved.
    pub fn act_dist(&self, u: &DistributionRep) -> Result<DistributionRep> {
        let grid = u.grid.clone();
        let dim = grid.dim;
        let mut atoms = Vec::new();
        for a in &u.atoms {
            match a {
                Atom::SmoothDensity(f) => {
                    let moved = self.act_smooth(f);
                    let jac = GridFunction::from_real_fn(grid.clone(), |y| {
                        let x = self.inverse(y);
                        1.0 / self.jacobian_det(&x[..dim]).abs()
                    });
                    atoms.push(Atom::SmoothDensity(moved.mul(&jac)?));
                }
                Atom::Dirac {
                    point,
                    order,
                    coeff,
                } => {
                    // per-axis chain-rule tables up to second order
                    let mut terms: Vec<([usize; 2], Complex64)> = vec![([0, 0], *coeff)];
                    for ax in 0..dim {
                        let m = order[ax];
                        let map = &self.axes[ax];
                        let x0 = point[ax];
                        let d1 = map.d_forward(x0);
                        let d2 = map.d2_forward(x0);
                        let table: Vec<(usize, f64)> = match m {
                            0 => vec![(0, 1.0)],
                            1 => vec![(1, d1)],
                            2 => vec![(2, d1 * d1), (1, -d2)],
                            _ => {
                                return Err(Error::DomainMismatch(
                                    "diffeomorphism action on Dirac atoms supports order <= 2".into(),
                                ))
                            }
                        };
                        let mut next = Vec::new();
                        for (ord, c) in &terms {
                            for (j, f) in &table {
                                let mut o = *ord;
                                o[ax] = *j;
                                next.push((o, c * Complex64::new(*f, 0.0)));
                            }
                        }
                        terms = next;
                    }
                    let new_point = self.forward(&point[..dim]);
                    for (ord, c) in terms {
                        atoms.push(Atom::Dirac {
                            point: new_point,
                            order: ord,
                            coeff: c,
                        });
                    }
                }
                Atom::Step {
                    axis,
                    location,
                    coeff,
                    envelope,
                } => {
                    let map = &self.axes[*axis];
                    if map.d_forward(*location) <= 0.0 {
                        return Err(Error::DomainMismatch(
                            "step transport needs an increasing map along the jump axis".into(),
                        ));
                    }
                    let new_location = map.forward(*location);
                    let env_samples = GridFunction::from_fn(grid.clone(), |y| {
                        let x = self.inverse(y);
                        let inside = (0..dim).all(|a| x[a] >= grid.comp.lo[a] && x[a] <= grid.comp.hi[a]);
                        if !inside {
                            return Complex64::new(0.0, 0.0);
                        }
                        let jac = 1.0 / self.jacobian_det(&x[..dim]).abs();
                        match envelope {
                            None => Complex64::new(jac, 0.0),
                            Some(e) => e.eval(&x[..dim]) * jac,
                        }
                    });
                    atoms.push(Atom::Step {
                        axis: *axis,
                        location: new_location,
                        coeff: *coeff,
                        envelope: Some(Envelope {
                            samples: env_samples,
                            masks: None,
                        }),
                    });
                }
            }
        }
        Ok(DistributionRep { grid, atoms })
    }

    /// Density pushforward along the inverse map.
    pub fn act_dist_inverse(&self, u: &DistributionRep) -> Result<DistributionRep> {
        self.inverted_view()?.act_dist(u)
    }

    /// Closed-form inverse for the affine/identity axes; Newton-backed view
    /// otherwise (exposed through InverseDiffeo).
    fn inverted_view(&self) -> Result<InverseDiffeo<'_>> {
        Ok(InverseDiffeo { base: self })
    }

    /// Grid residual of forward(inverse(y)) - y, for the catalog invariant.
    pub fn roundtrip_residual(&self, sample: &[f64]) -> f64 {
        let x = self.inverse(sample);
        let y = self.forward(&x[..sample.len()]);
        (0..sample.len())
            .map(|a| (y[a] - sample[a]).abs())
            .fold(0.0, f64::max)
    }
}

/// The inverse of a catalog diffeomorphism, acting through the same rules
/// with derivatives obtained from the inverse function theorem.
struct InverseDiffeo<'a> {
    base: &'a Diffeo,
}

impl InverseDiffeo<'_> {
    fn forward(&self, x: &[f64]) -> [f64; 2] {
        self.base.inverse(x)
    }

    fn d_forward(&self, ax: usize, x: f64) -> f64 {
        let xi = self.base.axes[ax].inverse(x);
        1.0 / self.base.axes[ax].d_forward(xi)
    }

    fn d2_forward(&self, ax: usize, x: f64) -> f64 {
        let xi = self.base.axes[ax].inverse(x);
        let d1 = self.base.axes[ax].d_forward(xi);
        -self.base.axes[ax].d2_forward(xi) / (d1 * d1 * d1)
    }

    fn act_dist(&self, u: &DistributionRep) -> Result<DistributionRep> {
        let grid = u.grid.clone();
        let dim = grid.dim;
        let base = self.base;
        let mut atoms = Vec::new();
        for a in &u.atoms {
            match a {
                Atom::SmoothDensity(f) => {
                    let moved = base.pull_smooth(f); // f o mu = f o (mu^{-1})^{-1}
                    let jac = GridFunction::from_real_fn(grid.clone(), |y| {
                        base.jacobian_det(y).abs()
                    });
                    atoms.push(Atom::SmoothDensity(moved.mul(&jac)?));
                }
                Atom::Dirac {
                    point,
                    order,
                    coeff,
                } => {
                    let mut terms: Vec<([usize; 2], Complex64)> = vec![([0, 0], *coeff)];
                    for ax in 0..dim {
                        let m = order[ax];
                        let x0 = point[ax];
                        let d1 = self.d_forward(ax, x0);
                        let d2 = self.d2_forward(ax, x0);
                        let table: Vec<(usize, f64)> = match m {
                            0 => vec![(0, 1.0)],
                            1 => vec![(1, d1)],
                            2 => vec![(2, d1 * d1), (1, -d2)],
                            _ => {
                                return Err(Error::DomainMismatch(
                                    "diffeomorphism action on Dirac atoms supports order <= 2".into(),
                                ))
                            }
                        };
                        let mut next = Vec::new();
                        for (ord, c) in &terms {
                            for (j, f) in &table {
                                let mut o = *ord;
                                o[ax] = *j;
                                next.push((o, c * Complex64::new(*f, 0.0)));
                            }
                        }
                        terms = next;
                    }
                    let new_point = self.forward(&point[..dim]);
                    for (ord, c) in terms {
                        atoms.push(Atom::Dirac {
                            point: new_point,
                            order: ord,
                            coeff: c,
                        });
                    }
                }
                Atom::Step {
                    axis,
                    location,
                    coeff,
                    envelope,
                } => {
                    let new_location = self.base.axes[*axis].inverse(*location);
                    let env_samples = GridFunction::from_fn(grid.clone(), |y| {
                        let x = base.forward(y);
                        let jac = base.jacobian_det(y).abs();
                        match envelope {
                            None => Complex64::new(jac, 0.0),
                            Some(e) => e.eval(&x[..dim]) * jac,
                        }
                    });
                    atoms.push(Atom::Step {
                        axis: *axis,
                        location: new_location,
                        coeff: *coeff,
                        envelope: Some(Envelope {
                            samples: env_samples,
                            masks: None,
                        }),
                    });
                }
            }
        }
        Ok(DistributionRep { grid, atoms })
    }
}

/// The standard catalog used by scenarios and acceptance checks.
pub fn catalog_1d() -> Vec<Diffeo> {
    vec![
        Diffeo::identity(1),
        Diffeo::new_1d(Diffeo1D::Affine { a: 0.5, b: 0.3 }, "affine-0.5-0.3"),
        Diffeo::new_1d(Diffeo1D::SinePerturb { amp: 0.3 }, "sine-0.3"),
        Diffeo::new_1d(Diffeo1D::TanhStretch { amp: 0.4 }, "tanh-0.4"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::dist::pair;
    use crate::calculus::grid::{BoxRegion, Grid, Window};
    use std::sync::Arc;

    fn grid() -> Arc<Grid> {
        Grid::new(BoxRegion::new_1d(-4.0, 4.0), 1 << 13).unwrap()
    }

    #[test]
    fn roundtrip_and_jacobian_bounds() {
        let g = grid();
        for d in catalog_1d() {
            for idx in (0..g.total_points()).step_by(97) {
                let y = g.point(idx);
                assert!(
                    d.roundtrip_residual(&y[..1]) < 1e-10,
                    "roundtrip failed for {}",
                    d.name
                );
                let x = d.inverse(&y[..1]);
                assert!(d.jacobian_det(&x[..1]).abs() > 0.05);
            }
        }
    }

    #[test]
    fn identity_acts_trivially() {
        let g = grid();
        let d = Diffeo::identity(1);
        let f = GridFunction::from_real_fn(g.clone(), |x| (-x[0] * x[0]).exp());
        let err = d.act_smooth(&f).sub(&f).unwrap().max_abs();
        assert!(err < 1e-12);
    }

    #[test]
    fn smooth_roundtrip_through_sine_perturbation() {
        let g = grid();
        let d = Diffeo::new_1d(Diffeo1D::SinePerturb { amp: 0.3 }, "sine");
        let f = GridFunction::from_real_fn(g.clone(), |x| (-x[0] * x[0] / 2.0).exp());
        let back = d.pull_smooth(&d.act_smooth(&f));
        // compare away from the box edge where composition leaves the grid
        let inner = BoxRegion::new_1d(-3.0, 3.0);
        let mut err = 0.0f64;
        for idx in 0..g.total_points() {
            let p = g.point(idx);
            if inner.contains(&p[..1]) {
                err = err.max((back.data[idx] - f.data[idx]).norm());
            }
        }
        assert!(err <= 1e-8, "roundtrip err {err}");
    }

    #[test]
    fn delta_pushforward_preserves_pairing_values() {
        let g = grid();
        // mu(x) = 2x maps delta_0 to delta_0 with unchanged coefficient
        let d = Diffeo::new_1d(Diffeo1D::Affine { a: 2.0, b: 0.0 }, "dbl");
        let u = DistributionRep::delta(g.clone(), [0.0, 0.0]);
        let moved = d.act_dist(&u).unwrap();
        match &moved.atoms[0] {
            Atom::Dirac { point, coeff, .. } => {
                assert_eq!(point[0], 0.0);
                assert!((coeff.re - 1.0).abs() < 1e-15);
            }
            other => panic!("unexpected atom {other:?}"),
        }
    }

    #[test]
    fn pairing_transport_identity() {
        // <mu(u), phi> = <u, phi o mu> for the density convention
        let g = grid();
        let w = Window::new(BoxRegion::new_1d(-4.0, 4.0), BoxRegion::new_1d(-2.5, 2.5)).unwrap();
        let d = Diffeo::new_1d(Diffeo1D::SinePerturb { amp: 0.3 }, "sine");
        let phi = GridFunction::from_real_fn(g.clone(), |x| {
            let u = x[0] / 0.45;
            (-u * u).exp()
        });
        let phi_pull = d.pull_smooth(&phi);
        for u in [
            DistributionRep::delta(g.clone(), [0.3, 0.0]),
            DistributionRep::delta_derivative(g.clone(), [0.3, 0.0], [1, 0]),
            DistributionRep::heaviside(g.clone(), 0, 0.2),
            DistributionRep::smooth(GridFunction::from_real_fn(g.clone(), |x| {
                (-x[0] * x[0]).exp()
            })),
        ] {
            let lhs = pair(&d.act_dist(&u).unwrap(), &phi, &w).unwrap();
            let rhs = pair(&u, &phi_pull, &w).unwrap();
            assert!(
                (lhs - rhs).norm() < 1e-6 * (1.0 + rhs.norm()),
                "transport mismatch {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn inverse_action_undoes_forward_on_atoms() {
        let g = grid();
        let d = Diffeo::new_1d(Diffeo1D::SinePerturb { amp: 0.3 }, "sine");
        let u = DistributionRep::delta_derivative(g, [0.5, 0.0], [1, 0]);
        let there = d.act_dist(&u).unwrap();
        let back = d.act_dist_inverse(&there).unwrap();
        match (&u.atoms[0], &back.atoms[0]) {
            (
                Atom::Dirac { point: p0, coeff: c0, .. },
                Atom::Dirac { point: p1, coeff: c1, .. },
            ) => {
                assert!((p0[0] - p1[0]).abs() < 1e-12);
                assert!((c0 - c1).norm() < 1e-12);
            }
            _ => panic!(),
        }
    }
}
