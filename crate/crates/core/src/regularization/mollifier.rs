//! Construction of the mollifier operators
//! Phi_eps(u) = (kappa_eps u) * theta_eps with
//! theta_eps(x) = eps^{-d} Finv(psi)(x/eps) chi(x/r_eps),
//! psi an even frequency plateau (1 on B(0,1), support in B(0,2)) and chi an
//! even spatial plateau of a strictly smaller class in the ultra regimes.
//!
//! Smooth inputs and density atoms go through FFT convolution. Dirac atoms
//! use exact spectral translation of theta and its derivatives. Step atoms
//! split off a second-order Taylor polynomial of the smooth factor at the
//! jump (whose convolution is exact via spectral antiderivatives of theta)
//! and convolve the C^2 remainder.

use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::coeff::SmoothCoeff;
use crate::calculus::dist::{Atom, DistributionRep};
use crate::calculus::grid::{
    mode_wavenumber, Antiderivative, BoxRegion, Grid, GridFunction, Spectrum, Window,
};
use crate::calculus::mask::{Mask1D, MaskProduct, SmoothMask};
use crate::error::{Error, Result};
use crate::weights::RNet;

/// Which test-pair family the net is built for.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    /// distributions / smooth functions, polynomial scale
    Distribution,
    /// ultradifferentiable class of Gevrey order s, Beurling flavor
    GevreyBeurling { s: f64 },
    /// Roumieu flavor
    GevreyRoumieu { s: f64 },
}

impl Regime {
    pub fn gevrey_order(&self) -> Option<f64> {
        match self {
            Regime::Distribution => None,
            Regime::GevreyBeurling { s } | Regime::GevreyRoumieu { s } => Some(*s),
        }
    }
}

/// Parameters of the mollifier construction.
#[derive(Debug, Clone)]
pub struct MollifierParams {
    pub regime: Regime,
    /// transition exponent of psi (frequency cutoff); class s = 1 + 1/q
    pub psi_q: f64,
    /// transition exponent of chi (spatial cutoff); strictly smaller class
    /// than psi in the ultra regimes
    pub chi_q: f64,
    /// plateau and support radii of both cutoffs
    pub psi_inner: f64,
    pub psi_outer: f64,
    pub chi_inner: f64,
    pub chi_outer: f64,
    /// radius net eps -> r_eps
    pub rnet: Arc<RNet>,
    /// base margin of the compact exhaustion (fraction of the domain length)
    pub exhaustion_frac: f64,
}

impl MollifierParams {
    /// Distribution-regime defaults: smooth cutoffs, power-law radius net
    /// r_eps = eps^{1/4}. Any net with r -> 0 and r/eps -> infinity works;
    /// the quarter power leaves enough room between the mollification scale
    /// and the cutoff scale for steep superpolynomial decay on dyadic grids.
    pub fn distribution_default() -> MollifierParams {
        MollifierParams {
            regime: Regime::Distribution,
            psi_q: 1.0,
            chi_q: 2.0,
            psi_inner: 1.0,
            psi_outer: 2.0,
            chi_inner: 1.0,
            chi_outer: 2.0,
            rnet: RNet::power(0.25, 1.0),
            exhaustion_frac: 0.25,
        }
    }

    /// Ultra-regime defaults for Gevrey order s with chi of order s_chi < s,
    /// radius net from the paired construction.
    pub fn gevrey_default(regime: Regime, s_chi: f64, rnet: Arc<RNet>) -> Result<MollifierParams> {
        let s = regime
            .gevrey_order()
            .ok_or_else(|| Error::Config("gevrey_default needs an ultra regime".into()))?;
        if !(s_chi > 1.0 && s_chi < s) {
            return Err(Error::Config(format!(
                "chi class must satisfy 1 < s_chi < s, got s_chi = {s_chi}, s = {s}"
            )));
        }
        Ok(MollifierParams {
            regime,
            psi_q: 1.0 / (s - 1.0),
            chi_q: 1.0 / (s_chi - 1.0),
            psi_inner: 1.0,
            psi_outer: 2.0,
            chi_inner: 1.0,
            chi_outer: 2.0,
            rnet,
            exhaustion_frac: 0.25,
        })
    }

    pub fn psi_mask_1d(&self) -> Mask1D {
        Mask1D::plateau(-self.psi_outer, -self.psi_inner, self.psi_inner, self.psi_outer, self.psi_q)
    }

    pub fn chi_mask_1d(&self) -> Mask1D {
        Mask1D::plateau(-self.chi_outer, -self.chi_inner, self.chi_inner, self.chi_outer, self.chi_q)
    }
}

/// The compact exhaustion K_n (domain shrunk by decreasing margins) with
/// its plateau cutoffs kappa_n: 1 on K_n, 0 within 3/4 of the margin from
/// the boundary, transition width = margin / 4.
///
/// The margins shrink like (1 + n)^{-1/4}: any rate tending to zero
/// exhausts the domain, and this one keeps the transition width well above
/// the grid spacing over the whole usable eps range, so the cutoffs stay
/// spectrally resolved.
pub fn exhaustion_cutoff(grid: &Arc<Grid>, params: &MollifierParams, eps: f64) -> SmoothMask {
    let n = (1.0 / eps).floor().max(1.0);
    let dim = grid.dim;
    let mut core = grid.domain;
    let mut outer = grid.domain;
    for a in 0..dim {
        let base = params.exhaustion_frac * grid.domain.len(a);
        let margin = base * (1.0 + n).powf(-0.25);
        core.lo[a] += margin;
        core.hi[a] -= margin;
        outer.lo[a] += 0.75 * margin;
        outer.hi[a] -= 0.75 * margin;
    }
    SmoothMask::plateau(&core, &outer, params.psi_q)
}

/// Per-axis kernel data: the 1D mollifier factor, its spectrum, and the
/// spectral antiderivatives of x^i theta1 used by step atoms.
pub struct AxisKernel {
    pub grid1: Arc<Grid>,
    pub theta1: GridFunction,
    pub theta1_spec: Spectrum,
    pub anti: [Antiderivative; 3],
    pub moments: [Complex64; 3],
}

/// One concrete regularization operator Phi_eps.
pub struct MollifierOp {
    pub grid: Arc<Grid>,
    pub eps: f64,
    pub r_eps: f64,
    pub params: MollifierParams,
    /// theta_eps sampled on the main grid
    pub theta: GridFunction,
    pub theta_spec: Spectrum,
    pub kappa: SmoothMask,
    kappa_samples: GridFunction,
    axis_kernels: Vec<AxisKernel>,
}

impl std::fmt::Debug for MollifierOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MollifierOp")
            .field("eps", &self.eps)
            .field("r_eps", &self.r_eps)
            .finish()
    }
}

/// 1D sub-grid of a (possibly 2D) grid along one axis.
fn axis_grid(grid: &Arc<Grid>, axis: usize) -> Arc<Grid> {
    if grid.dim == 1 {
        return grid.clone();
    }
    Arc::new(Grid {
        dim: 1,
        domain: BoxRegion::new_1d(grid.domain.lo[axis], grid.domain.hi[axis]),
        comp: BoxRegion::new_1d(grid.comp.lo[axis], grid.comp.hi[axis]),
        n: [grid.n[axis], 1],
    })
}

/// Synthesize the band-limited factor g(x) = eps^{-1} Finv(psi)(x/eps) on a
/// 1D grid by sampling psi(eps k) on a padded frequency grid; padding pushes
/// the periodic wrap far enough out that its tail is below round-off.
fn synthesize_g(grid1: &Arc<Grid>, psi: &Mask1D, eps: f64, pad: usize) -> GridFunction {
    let n = grid1.n[0];
    let n_pad = n * pad;
    let len = grid1.comp.len(0) * pad as f64;
    // padded box centered on the original one; the original grid points sit
    // at an integer index offset
    let lo = grid1.comp.lo[0] - grid1.comp.len(0) * ((pad - 1) as f64) / 2.0;
    let padded = Arc::new(Grid {
        dim: 1,
        domain: BoxRegion::new_1d(lo, lo + len),
        comp: BoxRegion::new_1d(lo, lo + len),
        n: [n_pad, 1],
    });
    let mut spec = Spectrum::zero(padded.clone());
    for idx in 0..n_pad {
        let k = padded.wavenumber(0, idx);
        spec.modes[idx] = Complex64::new(psi.eval(eps * k), 0.0);
    }
    let g_padded = spec.to_grid();
    // extract the original grid points: same dx, offset by an integer count
    let offset = ((grid1.comp.lo[0] - lo) / grid1.dx(0)).round() as usize;
    let data = (0..n).map(|j| g_padded.data[offset + j]).collect();
    GridFunction {
        grid: grid1.clone(),
        data,
    }
}

impl MollifierOp {
    pub fn build(grid: Arc<Grid>, params: &MollifierParams, eps: f64) -> Result<Arc<MollifierOp>> {
        // frequency contract: the grid must resolve psi_outer * 2 / eps
        let need = 2.0 * params.psi_outer / eps;
        for a in 0..grid.dim {
            if grid.k_max(a) < need {
                return Err(Error::UnresolvedSpectrum {
                    tail: need,
                    limit: grid.k_max(a),
                });
            }
        }
        let r_eps = params.rnet.r(eps)?;
        let psi = params.psi_mask_1d();
        let chi = params.chi_mask_1d();
        let pad = if grid.dim == 1 { 16 } else { 4 };

        let mut axis_kernels = Vec::with_capacity(grid.dim);
        for a in 0..grid.dim {
            let g1 = axis_grid(&grid, a);
            let g = synthesize_g(&g1, &psi, eps, pad);
            let n1 = g1.n[0];
            let mut data: Vec<Complex64> = (0..n1)
                .map(|j| g.data[j] * chi.eval(g1.x(0, j) / r_eps))
                .collect();
            // theta is real and even; enforce both exactly so that symmetry
            // checks see only pairing round-off
            data[0] = Complex64::new(data[0].re, 0.0);
            for j in 1..=n1 / 2 {
                let v = 0.5 * (data[j].re + data[n1 - j].re);
                data[j] = Complex64::new(v, 0.0);
                data[n1 - j] = Complex64::new(v, 0.0);
            }
            let theta1 = GridFunction {
                grid: g1.clone(),
                data,
            };
            let theta1_spec = theta1.spectrum();
            let x_theta = GridFunction::from_fn(g1.clone(), |x| Complex64::new(x[0], 0.0))
                .mul(&theta1)?;
            let xx_theta = GridFunction::from_fn(g1.clone(), |x| Complex64::new(x[0] * x[0], 0.0))
                .mul(&theta1)?;
            let anti = [
                Antiderivative::of(&theta1, 0),
                Antiderivative::of(&x_theta, 0),
                Antiderivative::of(&xx_theta, 0),
            ];
            let moments = [theta1.integral(), x_theta.integral(), xx_theta.integral()];
            axis_kernels.push(AxisKernel {
                grid1: g1,
                theta1,
                theta1_spec,
                anti,
                moments,
            });
        }

        // full theta on the main grid (tensor product of axis factors)
        let theta = match grid.dim {
            1 => axis_kernels[0].theta1.clone(),
            _ => {
                let t0 = &axis_kernels[0].theta1;
                let t1 = &axis_kernels[1].theta1;
                let mut data = Vec::with_capacity(grid.total_points());
                for i0 in 0..grid.n[0] {
                    for i1 in 0..grid.n[1] {
                        data.push(t0.data[i0] * t1.data[i1]);
                    }
                }
                GridFunction {
                    grid: grid.clone(),
                    data,
                }
            }
        };
        let theta_spec = theta.spectrum();
        let kappa = exhaustion_cutoff(&grid, params, eps);
        let kappa_samples = kappa.samples(&grid);
        Ok(Arc::new(MollifierOp {
            grid,
            eps,
            r_eps,
            params: params.clone(),
            theta,
            theta_spec,
            kappa,
            kappa_samples,
            axis_kernels,
        }))
    }

    /// Upper bound for the support spread: theta vanishes outside the box
    /// of radius chi_outer * r_eps.
    pub fn support_radius(&self) -> f64 {
        self.params.chi_outer * self.r_eps
    }

    pub fn axis_kernels_ref(&self) -> &[AxisKernel] {
        &self.axis_kernels
    }

    pub fn apply_smooth(&self, f: &GridFunction) -> Result<GridFunction> {
        let kf = f.mul(&self.kappa_samples)?;
        Ok(kf.spectrum().convolve(&self.theta_spec)?.to_grid())
    }

    pub fn apply_dist(&self, u: &DistributionRep) -> Result<GridFunction> {
        if !self.grid.same_geometry(&u.grid) {
            return Err(Error::GridMismatch("operator and distribution grids differ".into()));
        }
        let mut acc = GridFunction::zero(self.grid.clone());
        for atom in &u.atoms {
            let part = match atom {
                Atom::SmoothDensity(f) => self.apply_smooth(f)?,
                Atom::Dirac {
                    point,
                    order,
                    coeff,
                } => self.apply_dirac(point, order, *coeff)?,
                Atom::Step {
                    axis,
                    location,
                    coeff,
                    envelope,
                } => self.apply_step(*axis, *location, *coeff, envelope.as_ref())?,
            };
            acc = acc.add(&part)?;
        }
        Ok(acc)
    }

    /// (kappa delta^(a)_{x0}) * theta via spectral translation; Leibniz
    /// corrections appear only when x0 leaves the kappa plateau.
    fn apply_dirac(
        &self,
        point: &[f64; 2],
        order: &[usize; 2],
        coeff: Complex64,
    ) -> Result<GridFunction> {
        let dim = self.grid.dim;
        let kappa_coeff = SmoothCoeff::Mask(self.kappa.clone());
        // plateau shortcut: kappa identically 1 near the point
        let mut near = BoxRegion {
            dim,
            lo: *point,
            hi: *point,
        };
        for a in 0..dim {
            near.lo[a] -= 0.05;
            near.hi[a] += 0.05;
        }
        let on_plateau = self.kappa.is_one_on(&near);

        let mut acc = GridFunction::zero(self.grid.clone());
        let betas: Vec<[usize; 2]> = if on_plateau {
            vec![[0, 0]]
        } else {
            let mut v = Vec::new();
            for b0 in 0..=order[0] {
                for b1 in 0..=order[1] {
                    v.push([b0, b1]);
                }
            }
            v
        };
        for beta in betas {
            let kd = if beta == [0, 0] {
                if on_plateau {
                    1.0
                } else {
                    kappa_coeff.eval(&point[..dim])
                }
            } else {
                kappa_coeff.deriv_at(&point[..dim], &beta)?
            };
            if kd == 0.0 {
                continue;
            }
            let sign = if (beta[0] + beta[1]) % 2 == 0 { 1.0 } else { -1.0 };
            let binom = binom_f(order[0], beta[0]) * binom_f(order[1], beta[1]);
            let rem = [order[0] - beta[0], order[1] - beta[1]];
            // theta^(rem)(y - x0): differentiate and shift in frequency
            let mut spec = self.theta_spec.clone();
            for (idx, m) in spec.modes.iter_mut().enumerate() {
                let k = mode_wavenumber(&self.grid, idx);
                let mut factor = Complex64::new(1.0, 0.0);
                for a in 0..dim {
                    factor *= Complex64::new(0.0, k[a]).powu(rem[a] as u32);
                }
                let phase = -(k[0] * point[0] + if dim == 2 { k[1] * point[1] } else { 0.0 });
                *m *= factor * Complex64::from_polar(1.0, phase);
            }
            let term = spec.to_grid();
            acc = acc.add(&term.scale(coeff * sign * binom * kd))?;
        }
        Ok(acc)
    }

    /// (kappa env H_c) * theta: Taylor-split along the jump axis.
    fn apply_step(
        &self,
        axis: usize,
        location: f64,
        coeff: Complex64,
        envelope: Option<&crate::calculus::dist::Envelope>,
    ) -> Result<GridFunction> {
        let grid = &self.grid;
        let dim = grid.dim;
        // the smooth factor G = kappa * envelope
        let g_samples = match envelope {
            None => self.kappa_samples.clone(),
            Some(e) => self.kappa_samples.mul(&e.samples)?,
        };
        let g_masks: Option<MaskProduct> = match envelope {
            None => Some(MaskProduct::single(self.kappa.clone())),
            Some(e) => e.masks.as_ref().map(|p| {
                let mut p = p.clone();
                p.push(self.kappa.clone());
                p
            }),
        };
        let kern = &self.axis_kernels[axis];

        // Taylor data of G along the jump axis at the jump line
        enum TaylorData {
            Scalar([Complex64; 3]),
            Slices([Vec<Complex64>; 3]),
        }
        let taylor = if dim == 1 {
            // closed-form plateau shortcut when the jump sits in a constant region
            let shortcut = g_masks.as_ref().and_then(|p| {
                let near = BoxRegion::new_1d(location - 0.05, location + 0.05);
                if p.is_one_on(&near) {
                    Some([
                        Complex64::new(1.0, 0.0),
                        Complex64::new(0.0, 0.0),
                        Complex64::new(0.0, 0.0),
                    ])
                } else if p.is_zero_on(&near) {
                    Some([Complex64::new(0.0, 0.0); 2 + 1])
                } else {
                    None
                }
            });
            TaylorData::Scalar(match shortcut {
                Some(v) => v,
                None => {
                    let d1 = g_samples.derivative(0, 1);
                    let d2 = g_samples.derivative(0, 2);
                    [
                        g_samples.band_eval(&[location]),
                        d1.band_eval(&[location]),
                        d2.band_eval(&[location]),
                    ]
                }
            })
        } else {
            let mut slices: [Vec<Complex64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
            for (j, slice) in slices.iter_mut().enumerate() {
                let d = if j == 0 {
                    g_samples.clone()
                } else {
                    g_samples.derivative(axis, j)
                };
                *slice = slice_along(&d, axis, location);
            }
            TaylorData::Slices(slices)
        };

        // analytic part: sum_j G_j/j! * m_j(y_ax - c) tensored with the
        // transverse smoothing of the slice
        let m = step_moment_kernels(kern, location)?;
        let mut analytic = GridFunction::zero(grid.clone());
        let factorial = [1.0, 1.0, 2.0];
        match &taylor {
            TaylorData::Scalar(g) => {
                for j in 0..3 {
                    if g[j].norm() == 0.0 {
                        continue;
                    }
                    analytic = analytic.add(&m[j].scale(g[j] / factorial[j]))?;
                }
            }
            TaylorData::Slices(slices) => {
                let perp = 1 - axis;
                let perp_kern = &self.axis_kernels[perp];
                for j in 0..3 {
                    let slice_fn = GridFunction {
                        grid: perp_kern.grid1.clone(),
                        data: slices[j].clone(),
                    };
                    let smoothed = slice_fn
                        .spectrum()
                        .convolve(&perp_kern.theta1_spec)?
                        .to_grid();
                    // outer product of m_j (axis) with smoothed slice (perp)
                    let mut data = Vec::with_capacity(grid.total_points());
                    for i0 in 0..grid.n[0] {
                        for i1 in 0..grid.n[1] {
                            let (ia, ip) = if axis == 0 { (i0, i1) } else { (i1, i0) };
                            data.push(m[j].data[ia] * smoothed.data[ip] / factorial[j]);
                        }
                    }
                    analytic = analytic.add(&GridFunction {
                        grid: grid.clone(),
                        data,
                    })?;
                }
            }
        }

        // remainder: (G - Taylor_2) * H sampled, convolved with theta
        let mut rem_data = Vec::with_capacity(grid.total_points());
        for idx in 0..grid.total_points() {
            let p = grid.point(idx);
            if p[axis] <= location {
                rem_data.push(Complex64::new(0.0, 0.0));
                continue;
            }
            let u = p[axis] - location;
            let taylor_val = match &taylor {
                TaylorData::Scalar(g) => g[0] + g[1] * u + g[2] * (u * u / 2.0),
                TaylorData::Slices(slices) => {
                    let ip = if axis == 0 { idx % grid.n[1] } else { idx / grid.n[1] };
                    slices[0][ip] + slices[1][ip] * u + slices[2][ip] * (u * u / 2.0)
                }
            };
            rem_data.push(g_samples.data[idx] - taylor_val);
        }
        let rem = GridFunction {
            grid: grid.clone(),
            data: rem_data,
        };
        let rem_conv = rem.spectrum().convolve(&self.theta_spec)?.to_grid();
        let mut out = analytic.add(&rem_conv)?.scale(coeff);

        // Exact support arithmetic: the result vanishes outside the support
        // of kappa * envelope * H widened by the kernel radius. The analytic
        // part saturates across the periodic seam and the remainder is
        // circularly convolved; both are only meaningful inside this region,
        // and the truth is identically zero outside it.
        let reach = self.support_radius() + 2.0 * grid.dx(axis);
        let mut support = match envelope {
            Some(e) => match crate::calculus::dist::numeric_support(&e.samples) {
                Some(b) => b,
                None => return Ok(GridFunction::zero(grid.clone())),
            },
            None => grid.comp,
        };
        // kappa support: strictly inside the domain by construction
        for a in 0..dim {
            support.lo[a] = support.lo[a].max(grid.domain.lo[a]) - reach;
            support.hi[a] = support.hi[a].min(grid.domain.hi[a]) + reach;
        }
        support.lo[axis] = support.lo[axis].max(location - reach);
        for idx in 0..grid.total_points() {
            let p = grid.point(idx);
            if !support.contains(&p[..dim]) {
                out.data[idx] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(out)
    }
}

/// m_j(y - c) on the axis grid: the convolution of (x-c)^j H(x-c) with the
/// 1D kernel, from spectral antiderivatives with exact saturation outside
/// the kernel support.
fn step_moment_kernels(kern: &AxisKernel, c: f64) -> Result<[GridFunction; 3]> {
    let g1 = &kern.grid1;
    let n = g1.n[0];
    // shift each periodic primitive by c
    let mut per_shifted = Vec::with_capacity(3);
    for a in &kern.anti {
        let mut spec = a.periodic.spectrum();
        spec.shift(&[c, 0.0]);
        per_shifted.push(spec.to_grid());
    }
    let supp = crate::calculus::dist::numeric_support(&kern.theta1)
        .map(|b| b.hi[0].abs().max(b.lo[0].abs()))
        .unwrap_or(0.0)
        + g1.dx(0);
    let mut out: Vec<Vec<Complex64>> = vec![Vec::with_capacity(n); 3];
    for idx in 0..n {
        let y = g1.x(0, idx);
        let u = y - c;
        let a_vals: [Complex64; 3] = if u <= -supp {
            [Complex64::new(0.0, 0.0); 3]
        } else if u >= supp {
            kern.moments
        } else {
            let mut v = [Complex64::new(0.0, 0.0); 3];
            for i in 0..3 {
                let anti = &kern.anti[i];
                v[i] = anti.c0 * (u - g1.comp.lo[0]) + per_shifted[i].data[idx] - anti.per_at_lo;
            }
            v
        };
        out[0].push(a_vals[0]);
        out[1].push(a_vals[0] * u - a_vals[1]);
        out[2].push(a_vals[0] * (u * u) - a_vals[1] * (2.0 * u) + a_vals[2]);
    }
    let mk = |data: Vec<Complex64>| GridFunction {
        grid: g1.clone(),
        data,
    };
    let mut it = out.into_iter();
    Ok([
        mk(it.next().unwrap()),
        mk(it.next().unwrap()),
        mk(it.next().unwrap()),
    ])
}

/// Values of a (2D) grid function on the line x_axis = c, as a function of
/// the transverse coordinate: per-column 1D band-limited evaluation.
fn slice_along(f: &GridFunction, axis: usize, c: f64) -> Vec<Complex64> {
    let g = &f.grid;
    let n_axis = g.n[axis];
    let n_perp = g.n[1 - axis];
    let g1 = axis_grid(&f.grid, axis);
    let mut out = Vec::with_capacity(n_perp);
    let mut col = vec![Complex64::new(0.0, 0.0); n_axis];
    for ip in 0..n_perp {
        for ia in 0..n_axis {
            let idx = if axis == 0 {
                g.flat(ia, ip)
            } else {
                g.flat(ip, ia)
            };
            col[ia] = f.data[idx];
        }
        let gf = GridFunction {
            grid: g1.clone(),
            data: col.clone(),
        };
        out.push(gf.spectrum().eval_at(&[c]));
    }
    out
}

fn binom_f(n: usize, k: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v *= (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Window margin rule: on probe windows with margin above this bound the
/// operator's kappa plateau covers everything the kernel reaches.
pub fn plateau_threshold(op: &MollifierOp, window: &Window) -> bool {
    let reach = op.support_radius();
    let mut enlarged = window.probe;
    for a in 0..window.probe.dim {
        enlarged.lo[a] -= reach;
        enlarged.hi[a] += reach;
    }
    op.kappa.is_one_on(&enlarged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::grid::Window;

    fn setup() -> (Arc<Grid>, MollifierParams) {
        let grid = Grid::new(BoxRegion::new_1d(-4.0, 4.0), 1 << 13).unwrap();
        (grid, MollifierParams::distribution_default())
    }

    #[test]
    fn frequency_contract_is_enforced() {
        let (grid, params) = setup();
        // eps too small for this grid
        assert!(matches!(
            MollifierOp::build(grid, &params, 2f64.powi(-12)),
            Err(Error::UnresolvedSpectrum { .. })
        ));
    }

    #[test]
    fn theta_of_delta_is_theta() {
        // Phi_eps(delta_0) = theta_eps when kappa is 1 near 0
        let (grid, params) = setup();
        let op = MollifierOp::build(grid.clone(), &params, 0.125).unwrap();
        let u = DistributionRep::delta(grid, [0.0, 0.0]);
        let out = op.apply_dist(&u).unwrap();
        let err = out.sub(&op.theta).unwrap().max_abs();
        assert!(err < 1e-12 * op.theta.max_abs(), "err {err}");
    }

    #[test]
    fn theta_supported_in_chi_ball() {
        let (grid, params) = setup();
        let op = MollifierOp::build(grid.clone(), &params, 0.125).unwrap();
        let r = op.support_radius();
        for idx in 0..grid.total_points() {
            let p = grid.point(idx);
            if p[0].abs() > r {
                assert_eq!(op.theta.data[idx].norm(), 0.0, "leak at {}", p[0]);
            }
        }
    }

    #[test]
    fn theta_mass_is_nearly_one() {
        let (grid, params) = setup();
        // defect at the coarsest eps reflects the slow kernel tail there;
        // it collapses superpolynomially along the net
        let tol = [0.15, 0.05, 5e-3, 5e-4, 1e-4];
        for (i, k) in (2..=6).enumerate() {
            let op = MollifierOp::build(grid.clone(), &params, 2f64.powi(-k)).unwrap();
            let mass = op.theta.integral();
            assert!(
                (mass.re - 1.0).abs() < tol[i] && mass.im.abs() < 1e-12,
                "mass {mass} at eps=2^-{k}"
            );
        }
        // far down the net the defect collapses to near round-off
        let small = MollifierOp::build(grid, &params, 2f64.powi(-9)).unwrap();
        let d_small = (small.theta.integral().re - 1.0).abs();
        assert!(d_small < 1e-12, "defect at 2^-9 is {d_small}");
    }

    #[test]
    fn smooth_and_density_paths_agree() {
        let (grid, params) = setup();
        let op = MollifierOp::build(grid.clone(), &params, 0.125).unwrap();
        let f = GridFunction::from_real_fn(grid.clone(), |x| (-x[0] * x[0]).exp());
        let a = op.apply_smooth(&f).unwrap();
        let b = op
            .apply_dist(&DistributionRep::smooth(f))
            .unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn step_application_matches_brute_force_quadrature() {
        let (grid, params) = setup();
        let op = MollifierOp::build(grid.clone(), &params, 0.25).unwrap();
        let u = DistributionRep::heaviside(grid.clone(), 0, 0.3);
        let out = op.apply_dist(&u).unwrap();
        // oracle: (kappa H_{0.3} * theta)(y) = int_{0.3}^{inf} kappa(x) theta(y - x) dx
        // with kappa = 1 on the relevant range and theta via band evaluation
        let theta = op.theta.clone();
        for &y in &[0.1, 0.3, 0.45, 1.0] {
            let oracle = crate::calculus::quadrature::adaptive_simpson(
                &|x: f64| theta.band_eval(&[y - x]).re,
                0.3,
                y + op.support_radius() + 0.1,
                1e-11,
            );
            // local interpolation: the result saturates across the periodic
            // seam, so global band evaluation would see the seam jump
            let got = out.interp8(&[y]).re;
            assert!(
                (got - oracle).abs() < 1e-8,
                "y={y}: {got} vs {oracle}"
            );
        }
    }

    #[test]
    fn dirac_derivative_uses_spectral_shift() {
        let (grid, params) = setup();
        let op = MollifierOp::build(grid.clone(), &params, 0.25).unwrap();
        let u = DistributionRep::delta_derivative(grid.clone(), [0.2, 0.0], [1, 0]);
        let out = op.apply_dist(&u).unwrap();
        // equals theta'(y - 0.2)
        let dtheta = op.theta.derivative(0, 1);
        for &y in &[0.0, 0.2, 0.7] {
            let expect = dtheta.band_eval(&[y - 0.2]).re;
            let got = out.band_eval(&[y]).re;
            assert!((got - expect).abs() < 1e-9 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn two_dimensional_net_smoke() {
        let grid = Grid::new(BoxRegion::new_2d([-2.0, -2.0], [2.0, 2.0]), 1 << 7).unwrap();
        let params = MollifierParams::distribution_default();
        let op = MollifierOp::build(grid.clone(), &params, 0.125).unwrap();
        // delta at the origin reproduces the tensor kernel
        let u = DistributionRep::delta(grid.clone(), [0.0, 0.0]);
        let out = op.apply_dist(&u).unwrap();
        let err = out.sub(&op.theta).unwrap().max_abs();
        assert!(err < 1e-12 * op.theta.max_abs(), "2d delta err {err}");
        // step along axis 0: result factorizes into the axis cumulative
        // times the transverse mass
        let h = DistributionRep::heaviside(grid.clone(), 0, 0.1);
        let hv = op.apply_dist(&h).unwrap();
        let kern = &op.axis_kernels_ref()[0];
        let mass1: f64 = kern.moments[0].re;
        // deep inside the plateau the value saturates to the kernel mass
        let idx = grid.flat(grid.index_below(0, 1.2), grid.index_below(1, 0.0));
        assert!(
            (hv.data[idx].re - mass1 * mass1).abs() < 1e-6,
            "2d step saturation {} vs {}",
            hv.data[idx].re,
            mass1 * mass1
        );
        // smooth path agrees with the density path
        let f = GridFunction::from_real_fn(grid.clone(), |x| {
            (-2.0 * (x[0] * x[0] + x[1] * x[1])).exp()
        });
        let a = op.apply_smooth(&f).unwrap();
        let b = op.apply_dist(&DistributionRep::smooth(f)).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn localization_far_dirac_gives_exact_zero_on_window() {
        let (grid, params) = setup();
        let op = MollifierOp::build(grid.clone(), &params, 0.125).unwrap();
        let u = DistributionRep::delta(grid.clone(), [3.0, 0.0]);
        let out = op.apply_dist(&u).unwrap();
        let w = Window::new(BoxRegion::new_1d(-4.0, 4.0), BoxRegion::new_1d(-1.0, 1.0)).unwrap();
        // dist(3.0, [-1,1]) = 2.0 > support radius: exact zero up to round-off
        assert!(out.sup_on(&w.probe) < 1e-13 * out.max_abs());
    }
}
