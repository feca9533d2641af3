//! Concrete distribution representations: a closed finite catalog of atoms
//! (smooth densities, Dirac terms, one-sided step terms with smooth
//! envelopes) with exact formal rules for derivatives and smooth
//! multiplication. The catalog is closed under every operator the engine
//! applies, which keeps mollified values computable to spectral accuracy.

use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::coeff::SmoothCoeff;
use crate::calculus::grid::{Antiderivative, BoxRegion, Grid, GridFunction, Window};
use crate::calculus::mask::{MaskProduct, SmoothMask};
use crate::error::{Error, Result};

/// Smooth factor carried by a step atom.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub samples: GridFunction,
    /// closed-form description when the envelope is a product of plateau
    /// masks; None loses exact constant-region queries but stays computable
    pub masks: Option<MaskProduct>,
}

impl Envelope {
    pub fn from_mask(grid: &Arc<Grid>, mask: SmoothMask) -> Envelope {
        Envelope {
            samples: mask.samples(grid),
            masks: Some(MaskProduct::single(mask)),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match &self.masks {
            Some(p) => Complex64::new(p.eval(x), 0.0),
            None => self.samples.interp8(x),
        }
    }

    /// Multiply by a smooth coefficient, keeping the closed form when possible.
    pub fn multiplied(&self, coeff: &SmoothCoeff, grid: &Arc<Grid>) -> Envelope {
        let samples = self
            .samples
            .mul(&coeff.samples(grid))
            .expect("envelope grids always match");
        let masks = match (&self.masks, coeff) {
            (Some(p), SmoothCoeff::Mask(m)) => {
                let mut p = p.clone();
                p.push(m.clone());
                Some(p)
            }
            _ => None,
        };
        Envelope { samples, masks }
    }
}

/// One atom of the distribution catalog.
#[derive(Debug, Clone)]
pub enum Atom {
    /// a smooth function acting by integration
    SmoothDensity(GridFunction),
    /// coeff * delta^(order) at a point (multi-index order per axis)
    Dirac {
        point: [f64; 2],
        order: [usize; 2],
        coeff: Complex64,
    },
    /// coeff * envelope(x) * H(x_axis - location)
    Step {
        axis: usize,
        location: f64,
        coeff: Complex64,
        envelope: Option<Envelope>,
    },
}

/// A distribution as a finite formal sum of atoms.
#[derive(Debug, Clone)]
pub struct DistributionRep {
    pub grid: Arc<Grid>,
    pub atoms: Vec<Atom>,
}

impl DistributionRep {
    pub fn new(grid: Arc<Grid>) -> DistributionRep {
        DistributionRep {
            grid,
            atoms: Vec::new(),
        }
    }

    pub fn delta(grid: Arc<Grid>, point: [f64; 2]) -> DistributionRep {
        Self::delta_derivative(grid, point, [0, 0])
    }

    pub fn delta_derivative(grid: Arc<Grid>, point: [f64; 2], order: [usize; 2]) -> DistributionRep {
        DistributionRep {
            grid,
            atoms: vec![Atom::Dirac {
                point,
                order,
                coeff: Complex64::new(1.0, 0.0),
            }],
        }
    }

    pub fn heaviside(grid: Arc<Grid>, axis: usize, location: f64) -> DistributionRep {
        DistributionRep {
            grid,
            atoms: vec![Atom::Step {
                axis,
                location,
                coeff: Complex64::new(1.0, 0.0),
                envelope: None,
            }],
        }
    }

    pub fn smooth(f: GridFunction) -> DistributionRep {
        DistributionRep {
            grid: f.grid.clone(),
            atoms: vec![Atom::SmoothDensity(f)],
        }
    }

    pub fn scaled(&self, c: Complex64) -> DistributionRep {
        let atoms = self
            .atoms
            .iter()
            .map(|a| match a {
                Atom::SmoothDensity(f) => Atom::SmoothDensity(f.scale(c)),
                Atom::Dirac {
                    point,
                    order,
                    coeff,
                } => Atom::Dirac {
                    point: *point,
                    order: *order,
                    coeff: c * coeff,
                },
                Atom::Step {
                    axis,
                    location,
                    coeff,
                    envelope,
                } => Atom::Step {
                    axis: *axis,
                    location: *location,
                    coeff: c * coeff,
                    envelope: envelope.clone(),
                },
            })
            .collect();
        DistributionRep {
            grid: self.grid.clone(),
            atoms,
        }
    }

    pub fn plus(&self, other: &DistributionRep) -> Result<DistributionRep> {
        if !self.grid.same_geometry(&other.grid) {
            return Err(Error::GridMismatch("adding distributions on different grids".into()));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Ok(DistributionRep {
            grid: self.grid.clone(),
            atoms,
        })
    }

    /// Formal partial derivative.
    pub fn derivative(&self, axis: usize) -> Result<DistributionRep> {
        let mut atoms = Vec::new();
        for a in &self.atoms {
            match a {
                Atom::SmoothDensity(f) => atoms.push(Atom::SmoothDensity(f.derivative(axis, 1))),
                Atom::Dirac {
                    point,
                    order,
                    coeff,
                } => {
                    let mut order = *order;
                    order[axis] += 1;
                    atoms.push(Atom::Dirac {
                        point: *point,
                        order,
                        coeff: *coeff,
                    });
                }
                Atom::Step {
                    axis: step_axis,
                    location,
                    coeff,
                    envelope,
                } => {
                    if axis == *step_axis {
                        if self.grid.dim == 2 {
                            return Err(Error::DomainMismatch(
                                "derivative of a 2D step along its jump axis leaves the atom catalog"
                                    .into(),
                            ));
                        }
                        // (env H_c)' = env' H_c + env(c) delta_c
                        let env_at_c = match envelope {
                            None => Complex64::new(1.0, 0.0),
                            Some(e) => e.eval(&[*location]),
                        };
                        atoms.push(Atom::Dirac {
                            point: [*location, 0.0],
                            order: [0, 0],
                            coeff: coeff * env_at_c,
                        });
                        if let Some(e) = envelope {
                            atoms.push(Atom::Step {
                                axis: *step_axis,
                                location: *location,
                                coeff: *coeff,
                                envelope: Some(Envelope {
                                    samples: e.samples.derivative(axis, 1),
                                    masks: None,
                                }),
                            });
                        }
                    } else {
                        // transverse derivative hits only the envelope
                        if let Some(e) = envelope {
                            atoms.push(Atom::Step {
                                axis: *step_axis,
                                location: *location,
                                coeff: *coeff,
                                envelope: Some(Envelope {
                                    samples: e.samples.derivative(axis, 1),
                                    masks: None,
                                }),
                            });
                        }
                        // envelope identically 1: derivative vanishes
                    }
                }
            }
        }
        Ok(DistributionRep {
            grid: self.grid.clone(),
            atoms,
        })
    }

    /// Multiply by a smooth coefficient: Leibniz on Dirac atoms, envelope
    /// product on steps, pointwise on densities.
    pub fn multiplied(&self, coeff: &SmoothCoeff) -> Result<DistributionRep> {
        let grid = &self.grid;
        let coeff_samples = coeff.samples(grid);
        let mut atoms = Vec::new();
        for a in &self.atoms {
            match a {
                Atom::SmoothDensity(f) => atoms.push(Atom::SmoothDensity(f.mul(&coeff_samples)?)),
                Atom::Dirac {
                    point,
                    order,
                    coeff: c,
                } => {
                    if order[0] + order[1] > 4 {
                        return Err(Error::ClassViolation(
                            "Dirac multiplication supported up to derivative order 4".into(),
                        ));
                    }
                    let x = &point[..grid.dim];
                    for b0 in 0..=order[0] {
                        for b1 in 0..=order[1] {
                            let w = coeff.deriv_at(x, &[b0, b1])?;
                            if w == 0.0 {
                                continue;
                            }
                            let sign = if (b0 + b1) % 2 == 0 { 1.0 } else { -1.0 };
                            let binom = binomial(order[0], b0) * binomial(order[1], b1);
                            atoms.push(Atom::Dirac {
                                point: *point,
                                order: [order[0] - b0, order[1] - b1],
                                coeff: c * Complex64::new(sign * binom * w, 0.0),
                            });
                        }
                    }
                }
                Atom::Step {
                    axis,
                    location,
                    coeff: c,
                    envelope,
                } => {
                    let env = match envelope {
                        None => Envelope {
                            samples: coeff_samples.clone(),
                            masks: match coeff {
                                SmoothCoeff::Mask(m) => Some(MaskProduct::single(m.clone())),
                                _ => None,
                            },
                        },
                        Some(e) => e.multiplied(coeff, grid),
                    };
                    atoms.push(Atom::Step {
                        axis: *axis,
                        location: *location,
                        coeff: *c,
                        envelope: Some(env),
                    });
                }
            }
        }
        Ok(DistributionRep {
            grid: self.grid.clone(),
            atoms,
        })
    }

    /// A box outside which the distribution vanishes, when one is known.
    pub fn support_bound(&self) -> Option<BoxRegion> {
        let mut acc: Option<BoxRegion> = None;
        for a in &self.atoms {
            let b = match a {
                Atom::Dirac { point, .. } => {
                    let mut r = BoxRegion {
                        dim: self.grid.dim,
                        lo: *point,
                        hi: *point,
                    };
                    for ax in 0..self.grid.dim {
                        r.lo[ax] -= 1e-12;
                        r.hi[ax] += 1e-12;
                    }
                    r
                }
                Atom::SmoothDensity(f) => numeric_support(f)?,
                Atom::Step {
                    axis,
                    location,
                    envelope,
                    ..
                } => {
                    let mut r = self.grid.comp;
                    r.lo[*axis] = r.lo[*axis].max(*location);
                    if let Some(env) = envelope {
                        if let Some(env_box) = envelope_support(env, &self.grid) {
                            r = r.intersect(&env_box)?;
                        }
                    }
                    r
                }
            };
            acc = Some(match acc {
                None => b,
                Some(mut prev) => {
                    for ax in 0..self.grid.dim {
                        prev.lo[ax] = prev.lo[ax].min(b.lo[ax]);
                        prev.hi[ax] = prev.hi[ax].max(b.hi[ax]);
                    }
                    prev
                }
            });
        }
        acc
    }
}

fn envelope_support(env: &Envelope, grid: &Arc<Grid>) -> Option<BoxRegion> {
    match &env.masks {
        Some(p) => {
            // intersection of factor supports (None bound = computational box)
            let mut r = grid.comp;
            for m in &p.factors {
                for (ax, m1) in m.axes.iter().enumerate() {
                    let (lo, hi) = m1.support();
                    if let Some(lo) = lo {
                        r.lo[ax] = r.lo[ax].max(lo);
                    }
                    if let Some(hi) = hi {
                        r.hi[ax] = r.hi[ax].min(hi);
                    }
                }
            }
            Some(r)
        }
        None => numeric_support(&env.samples),
    }
}

/// Bounding box of grid points where |f| exceeds 1e-14 of its peak.
pub fn numeric_support(f: &GridFunction) -> Option<BoxRegion> {
    let g = &f.grid;
    let peak = f.max_abs();
    if peak == 0.0 {
        return None;
    }
    let tol = 1e-14 * peak;
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for idx in 0..g.total_points() {
        if f.data[idx].norm() > tol {
            let p = g.point(idx);
            for ax in 0..g.dim {
                lo[ax] = lo[ax].min(p[ax]);
                hi[ax] = hi[ax].max(p[ax]);
            }
        }
    }
    if lo[0].is_infinite() {
        None
    } else {
        Some(BoxRegion {
            dim: g.dim,
            lo,
            hi,
        })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v *= (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Integrate out all axes except `axis`, producing a function on a 1D grid
/// with the same geometry along that axis.
pub fn marginal_along(f: &GridFunction, axis: usize) -> GridFunction {
    let g = &f.grid;
    if g.dim == 1 {
        return f.clone();
    }
    let other = 1 - axis;
    let dv = g.dx(other);
    let n_axis = g.n[axis];
    let n_other = g.n[other];
    let sub = Arc::new(Grid {
        dim: 1,
        domain: BoxRegion::new_1d(g.domain.lo[axis], g.domain.hi[axis]),
        comp: BoxRegion::new_1d(g.comp.lo[axis], g.comp.hi[axis]),
        n: [n_axis, 1],
    });
    let mut data = vec![Complex64::new(0.0, 0.0); n_axis];
    for i in 0..n_axis {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n_other {
            let idx = if axis == 0 { g.flat(i, j) } else { g.flat(j, i) };
            acc += f.data[idx];
        }
        data[i] = acc * dv;
    }
    GridFunction { grid: sub, data }
}

/// Numerical pairing of a distribution with a test function supported in the
/// probe window.
pub fn pair(u: &DistributionRep, phi: &GridFunction, window: &Window) -> Result<Complex64> {
    let g = &u.grid;
    if !g.same_geometry(&phi.grid) {
        return Err(Error::GridMismatch("pairing across different grids".into()));
    }
    // the probe must leave at least one grid cell of margin inside Omega
    let cell = (0..g.dim).map(|a| g.dx(a)).fold(0.0f64, f64::max);
    if window.margin() < cell {
        return Err(Error::SupportViolation(
            "probe window leaves less than one grid cell of margin".into(),
        ));
    }
    // numerical support check for the test function
    let peak = phi.max_abs();
    let mut outside = 0.0f64;
    for idx in 0..g.total_points() {
        let p = g.point(idx);
        if !window.probe.contains(&p[..g.dim]) {
            outside = outside.max(phi.data[idx].norm());
        }
    }
    if peak > 0.0 && outside > 1e-8 * peak {
        return Err(Error::SupportViolation(format!(
            "test function leaks outside the probe window ({:.3e} of peak)",
            outside / peak
        )));
    }

    let mut acc = Complex64::new(0.0, 0.0);
    for a in &u.atoms {
        acc += match a {
            Atom::SmoothDensity(f) => f.mul(phi)?.integral(),
            Atom::Dirac {
                point,
                order,
                coeff,
            } => {
                let mut spec = phi.spectrum();
                if order[0] > 0 {
                    spec.differentiate(0, order[0]);
                }
                if order[1] > 0 {
                    spec.differentiate(1, order[1]);
                }
                let sign = if (order[0] + order[1]) % 2 == 0 { 1.0 } else { -1.0 };
                coeff * sign * spec.eval_at(&point[..g.dim])
            }
            Atom::Step {
                axis,
                location,
                coeff,
                envelope,
            } => {
                let weighted = match envelope {
                    None => phi.clone(),
                    Some(e) => phi.mul(&e.samples)?,
                };
                let marg = marginal_along(&weighted, *axis);
                let total = marg.integral();
                let anti = Antiderivative::of(&marg, 0);
                coeff * (total - anti.value_at(*location))
            }
        };
    }
    Ok(acc)
}
