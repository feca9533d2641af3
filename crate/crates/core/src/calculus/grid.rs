//! Periodic computational grids and spectral operations.
//!
//! Grids are periodic over an enlarged box: the visible domain plus a margin
//! of at least 25% of the domain length on each side. Probe windows stay in
//! the domain interior, so wrap-around artifacts are quarantined to the
//! margin. The DFT convention matches the continuum transform
//! F(f)(k) = int f(x) e^{-ikx} dx.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));
static PLANS: Lazy<RwLock<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    if let Some(p) = PLANS.read().unwrap().get(&(len, forward)) {
        return p.clone();
    }
    let mut planner = PLANNER.lock().unwrap();
    let p = if forward {
        planner.plan_fft_forward(len)
    } else {
        planner.plan_fft_inverse(len)
    };
    PLANS.write().unwrap().insert((len, forward), p.clone());
    p
}

/// Axis-aligned box in R^d, d in {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxRegion {
    pub dim: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl BoxRegion {
    pub fn new_1d(lo: f64, hi: f64) -> Self {
        BoxRegion {
            dim: 1,
            lo: [lo, 0.0],
            hi: [hi, 0.0],
        }
    }

    pub fn new_2d(lo: [f64; 2], hi: [f64; 2]) -> Self {
        BoxRegion { dim: 2, lo, hi }
    }

    pub fn len(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim).all(|a| x[a] >= self.lo[a] && x[a] <= self.hi[a])
    }

    /// Smallest margin by which `inner` sits strictly inside `self`.
    pub fn margin_around(&self, inner: &BoxRegion) -> f64 {
        (0..self.dim)
            .map(|a| (inner.lo[a] - self.lo[a]).min(self.hi[a] - inner.hi[a]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn shrink(&self, by: f64) -> BoxRegion {
        let mut r = *self;
        for a in 0..self.dim {
            r.lo[a] += by;
            r.hi[a] -= by;
        }
        r
    }

    pub fn intersect(&self, other: &BoxRegion) -> Option<BoxRegion> {
        let mut r = *self;
        for a in 0..self.dim {
            r.lo[a] = r.lo[a].max(other.lo[a]);
            r.hi[a] = r.hi[a].min(other.hi[a]);
            if r.lo[a] >= r.hi[a] {
                return None;
            }
        }
        Some(r)
    }
}

/// Open set with a compact probe sub-box, K strictly inside Omega.
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub omega: BoxRegion,
    pub probe: BoxRegion,
}

impl Window {
    pub fn new(omega: BoxRegion, probe: BoxRegion) -> Result<Window> {
        if omega.dim != probe.dim {
            return Err(Error::DomainMismatch("window dimension mismatch".into()));
        }
        if omega.margin_around(&probe) <= 0.0 {
            return Err(Error::DomainMismatch(
                "probe box must sit strictly inside the open set".into(),
            ));
        }
        Ok(Window { omega, probe })
    }

    pub fn margin(&self) -> f64 {
        self.omega.margin_around(&self.probe)
    }
}

/// Uniform periodic grid over the enlarged computational box.
#[derive(Debug)]
pub struct Grid {
    pub dim: usize,
    /// the visible domain; probe windows live strictly inside it
    pub domain: BoxRegion,
    /// periodic computational box (domain plus margins)
    pub comp: BoxRegion,
    /// points per axis (power of two); n[1] = 1 in one dimension
    pub n: [usize; 2],
}

impl Grid {
    /// Build a grid with the default 25% margin per side.
    pub fn new(domain: BoxRegion, n_per_axis: usize) -> Result<Arc<Grid>> {
        Self::with_margin(domain, n_per_axis, 0.25)
    }

    pub fn with_margin(domain: BoxRegion, n_per_axis: usize, margin_frac: f64) -> Result<Arc<Grid>> {
        if !(domain.dim == 1 || domain.dim == 2) {
            return Err(Error::DomainMismatch("only d in {1, 2} supported".into()));
        }
        if !n_per_axis.is_power_of_two() {
            return Err(Error::GridMismatch(format!(
                "grid size must be a power of two, got {n_per_axis}"
            )));
        }
        if margin_frac < 0.25 {
            return Err(Error::GridMismatch("periodic margin must be at least 25%".into()));
        }
        let mut comp = domain;
        for a in 0..domain.dim {
            let m = margin_frac * domain.len(a);
            comp.lo[a] -= m;
            comp.hi[a] += m;
        }
        let mut n = [1usize; 2];
        for a in 0..domain.dim {
            n[a] = n_per_axis;
        }
        Ok(Arc::new(Grid {
            dim: domain.dim,
            domain,
            comp,
            n,
        }))
    }

    pub fn total_points(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn dx(&self, axis: usize) -> f64 {
        self.comp.len(axis) / self.n[axis] as f64
    }

    pub fn x(&self, axis: usize, idx: usize) -> f64 {
        self.comp.lo[axis] + idx as f64 * self.dx(axis)
    }

    /// Flat index of the 2D index pair (row-major; i1 = 0 in one dimension).
    pub fn flat(&self, i0: usize, i1: usize) -> usize {
        i0 * self.n[1] + i1
    }

    pub fn point(&self, flat: usize) -> [f64; 2] {
        let i0 = flat / self.n[1];
        let i1 = flat % self.n[1];
        [self.x(0, i0), if self.dim == 2 { self.x(1, i1) } else { 0.0 }]
    }

    /// Signed wavenumber 2*pi*j/L of DFT bin `idx` along `axis`.
    pub fn wavenumber(&self, axis: usize, idx: usize) -> f64 {
        let n = self.n[axis];
        let signed = if idx <= n / 2 {
            idx as isize
        } else {
            idx as isize - n as isize
        };
        2.0 * std::f64::consts::PI * signed as f64 / self.comp.len(axis)
    }

    /// Largest resolved wavenumber magnitude along an axis.
    pub fn k_max(&self, axis: usize) -> f64 {
        std::f64::consts::PI * self.n[axis] as f64 / self.comp.len(axis)
    }

    /// Nearest index at or below coordinate x (periodic reduction).
    pub fn index_below(&self, axis: usize, x: f64) -> usize {
        let len = self.comp.len(axis);
        let mut t = (x - self.comp.lo[axis]) / len;
        t -= t.floor();
        let idx = (t * self.n[axis] as f64).floor() as usize;
        idx.min(self.n[axis] - 1)
    }

    pub fn same_geometry(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.comp == other.comp && self.n == other.n
    }
}

/// Complex samples on a grid.
#[derive(Clone)]
pub struct GridFunction {
    pub grid: Arc<Grid>,
    pub data: Vec<Complex64>,
}

impl std::fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridFunction")
            .field("dim", &self.grid.dim)
            .field("n", &self.grid.n)
            .finish()
    }
}

/// Relative noise floor: spectral coefficients below this fraction of the
/// peak are zeroed before differentiation to stop k^order amplification of
/// round-off.
const NOISE_FLOOR: f64 = 2e-16;

impl GridFunction {
    pub fn zero(grid: Arc<Grid>) -> GridFunction {
        let n = grid.total_points();
        GridFunction {
            grid,
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> Complex64) -> GridFunction {
        let mut data = Vec::with_capacity(grid.total_points());
        for idx in 0..grid.total_points() {
            let p = grid.point(idx);
            data.push(f(&p[..grid.dim]));
        }
        GridFunction { grid, data }
    }

    pub fn from_real_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> GridFunction {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip(&self, other: &GridFunction, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<GridFunction> {
        if !self.grid.same_geometry(&other.grid) {
            return Err(Error::GridMismatch("zip on different grids".into()));
        }
        Ok(GridFunction {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sup of |f| over grid points inside the region.
    pub fn sup_on(&self, region: &BoxRegion) -> f64 {
        let g = &self.grid;
        let mut best = 0.0f64;
        for idx in 0..g.total_points() {
            let p = g.point(idx);
            if region.contains(&p[..g.dim]) {
                best = best.max(self.data[idx].norm());
            }
        }
        best
    }

    /// Trapezoid integral over the periodic box (spectrally accurate for
    /// functions supported away from the seam).
    pub fn integral(&self) -> Complex64 {
        let w = self.grid.dx(0) * if self.grid.dim == 2 { self.grid.dx(1) } else { 1.0 };
        self.data.iter().sum::<Complex64>() * w
    }

    /// DFT coefficients normalized as samples of the continuum transform.
    pub fn spectrum(&self) -> Spectrum {
        let g = &self.grid;
        let mut modes = self.data.clone();
        fft_all_axes(&mut modes, g, true);
        let weight = g.dx(0) * if g.dim == 2 { g.dx(1) } else { 1.0 };
        for (idx, m) in modes.iter_mut().enumerate() {
            let k = mode_wavenumber(g, idx);
            let phase = -(k[0] * g.comp.lo[0] + k[1] * g.comp.lo[1]);
            *m *= Complex64::from_polar(weight, phase);
        }
        Spectrum {
            grid: self.grid.clone(),
            modes,
        }
    }

    /// Spectral partial derivative of given order along an axis.
    pub fn derivative(&self, axis: usize, order: usize) -> GridFunction {
        if order == 0 {
            return self.clone();
        }
        let mut spec = self.spectrum();
        spec.differentiate(axis, order);
        spec.to_grid()
    }

    /// Fraction of spectral mass in the outer quarter band, relative to peak.
    pub fn spectral_tail_fraction(&self) -> f64 {
        let spec = self.spectrum();
        let g = &self.grid;
        let mut peak = 0.0f64;
        let mut tail = 0.0f64;
        for (idx, m) in spec.modes.iter().enumerate() {
            let a = m.norm();
            peak = peak.max(a);
            let k = mode_wavenumber(g, idx);
            let outer = (0..g.dim).any(|ax| k[ax].abs() >= 0.75 * g.k_max(ax));
            if outer {
                tail = tail.max(a);
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            tail / peak
        }
    }

    /// Band-limited evaluation of the trigonometric interpolant at x.
    pub fn band_eval(&self, x: &[f64]) -> Complex64 {
        let spec = self.spectrum();
        spec.eval_at(x)
    }

    /// Local polynomial interpolation of order 8 (barycentric Lagrange on an
    /// 8-point stencil per axis); used by diffeomorphism actions.
    pub fn interp8(&self, x: &[f64]) -> Complex64 {
        let g = &self.grid;
        match g.dim {
            1 => interp8_axis(self, 0, x[0], |i| self.data[i]),
            _ => {
                // tensor stencil: interpolate along axis 1 for each of the 8 rows
                let (idx0, xs0, w0) = stencil(g, 0, x[0]);
                let mut acc = Complex64::new(0.0, 0.0);
                let mut den = 0.0;
                let mut exact: Option<Complex64> = None;
                for s in 0..8 {
                    let i0 = idx0[s];
                    let row = interp8_axis(self, 1, x[1], |i1| self.data[g.flat(i0, i1)]);
                    let d = x[0] - xs0[s];
                    if d.abs() < 1e-300 {
                        exact = Some(row);
                        break;
                    }
                    let c = w0[s] / d;
                    acc += row * c;
                    den += c;
                }
                exact.unwrap_or(acc / den)
            }
        }
    }
}

fn interp8_axis(
    f: &GridFunction,
    axis: usize,
    x: f64,
    sample: impl Fn(usize) -> Complex64,
) -> Complex64 {
    let (idx, xs, w) = stencil(&f.grid, axis, x);
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for s in 0..8 {
        let d = x - xs[s];
        if d.abs() < 1e-300 {
            return sample(idx[s]);
        }
        let c = w[s] / d;
        num += sample(idx[s]) * c;
        den += c;
    }
    num / den
}

/// 8-point periodic stencil around x: indices, coordinates (unwrapped), and
/// barycentric weights for equispaced nodes.
fn stencil(g: &Grid, axis: usize, x: f64) -> ([usize; 8], [f64; 8], [f64; 8]) {
    // binomial barycentric weights for 8 equispaced nodes
    const W: [f64; 8] = [-1.0, 7.0, -21.0, 35.0, -35.0, 21.0, -7.0, 1.0];
    let n = g.n[axis] as isize;
    let dx = g.dx(axis);
    let len = g.comp.len(axis);
    let rel = (x - g.comp.lo[axis]) / dx;
    let base = rel.floor() as isize - 3;
    let mut idx = [0usize; 8];
    let mut xs = [0.0f64; 8];
    for s in 0..8 {
        let j = base + s as isize;
        let wrapped = j.rem_euclid(n) as usize;
        idx[s] = wrapped;
        // unwrapped coordinate so distances stay local
        let periods = (j - wrapped as isize) / n;
        xs[s] = g.comp.lo[axis] + wrapped as f64 * dx + periods as f64 * len;
    }
    (idx, xs, W)
}

/// DFT modes of a grid function, normalized as continuum-transform samples.
#[derive(Clone)]
pub struct Spectrum {
    pub grid: Arc<Grid>,
    pub modes: Vec<Complex64>,
}

pub fn mode_wavenumber(g: &Grid, flat: usize) -> [f64; 2] {
    let i0 = flat / g.n[1];
    let i1 = flat % g.n[1];
    [
        g.wavenumber(0, i0),
        if g.dim == 2 { g.wavenumber(1, i1) } else { 0.0 },
    ]
}

impl Spectrum {
    pub fn zero(grid: Arc<Grid>) -> Spectrum {
        let n = grid.total_points();
        Spectrum {
            grid,
            modes: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Back to samples.
    pub fn to_grid(&self) -> GridFunction {
        let g = &self.grid;
        let mut data = self.modes.clone();
        for (idx, m) in data.iter_mut().enumerate() {
            let k = mode_wavenumber(g, idx);
            let phase = k[0] * g.comp.lo[0] + k[1] * g.comp.lo[1];
            *m *= Complex64::from_polar(1.0, phase);
        }
        fft_all_axes(&mut data, g, false);
        let vol = g.comp.len(0) * if g.dim == 2 { g.comp.len(1) } else { 1.0 };
        for v in data.iter_mut() {
            *v /= vol;
        }
        GridFunction {
            grid: self.grid.clone(),
            data,
        }
    }

    /// Multiply by (i k_axis)^order, zeroing the Nyquist bin for odd orders
    /// and coefficients at the round-off floor.
    pub fn differentiate(&mut self, axis: usize, order: usize) {
        let g = self.grid.clone();
        let peak = self.modes.iter().map(|m| m.norm()).fold(0.0, f64::max);
        let floor = NOISE_FLOOR * peak;
        let n_axis = g.n[axis];
        for (idx, m) in self.modes.iter_mut().enumerate() {
            if m.norm() < floor {
                *m = Complex64::new(0.0, 0.0);
                continue;
            }
            let i_axis = if axis == 0 { idx / g.n[1] } else { idx % g.n[1] };
            if order % 2 == 1 && n_axis % 2 == 0 && i_axis == n_axis / 2 {
                *m = Complex64::new(0.0, 0.0);
                continue;
            }
            let k = g.wavenumber(axis, i_axis);
            *m *= Complex64::new(0.0, k).powu(order as u32);
        }
    }

    /// Shift the represented function by `c`: f(x) -> f(x - c).
    pub fn shift(&mut self, c: &[f64]) {
        let g = self.grid.clone();
        for (idx, m) in self.modes.iter_mut().enumerate() {
            let k = mode_wavenumber(&g, idx);
            let phase = -(k[0] * c[0] + if g.dim == 2 { k[1] * c[1] } else { 0.0 });
            *m *= Complex64::from_polar(1.0, phase);
        }
    }

    /// Pointwise product in frequency: continuum convolution of the samples.
    pub fn convolve(&self, other: &Spectrum) -> Result<Spectrum> {
        if !self.grid.same_geometry(&other.grid) {
            return Err(Error::GridMismatch("convolution on different grids".into()));
        }
        Ok(Spectrum {
            grid: self.grid.clone(),
            modes: self
                .modes
                .iter()
                .zip(&other.modes)
                .map(|(&a, &b)| a * b)
                .collect(),
        })
    }

    /// Evaluate the trigonometric interpolant at an arbitrary point.
    pub fn eval_at(&self, x: &[f64]) -> Complex64 {
        let g = &self.grid;
        let vol = g.comp.len(0) * if g.dim == 2 { g.comp.len(1) } else { 1.0 };
        match g.dim {
            1 => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (idx, m) in self.modes.iter().enumerate() {
                    let k = g.wavenumber(0, idx);
                    acc += m * Complex64::from_polar(1.0, k * x[0]);
                }
                acc / vol
            }
            _ => {
                // contract axis 1 first, then axis 0
                let n0 = g.n[0];
                let n1 = g.n[1];
                let mut partial = vec![Complex64::new(0.0, 0.0); n0];
                for i0 in 0..n0 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i1 in 0..n1 {
                        let k1 = g.wavenumber(1, i1);
                        acc += self.modes[g.flat(i0, i1)] * Complex64::from_polar(1.0, k1 * x[1]);
                    }
                    partial[i0] = acc;
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for (i0, p) in partial.iter().enumerate() {
                    let k0 = g.wavenumber(0, i0);
                    acc += p * Complex64::from_polar(1.0, k0 * x[0]);
                }
                acc / vol
            }
        }
    }
}

fn fft_all_axes(data: &mut [Complex64], g: &Grid, forward: bool) {
    match g.dim {
        1 => {
            plan(g.n[0], forward).process(data);
        }
        _ => {
            let n0 = g.n[0];
            let n1 = g.n[1];
            let p1 = plan(n1, forward);
            for row in data.chunks_exact_mut(n1) {
                p1.process(row);
            }
            let p0 = plan(n0, forward);
            let mut col = vec![Complex64::new(0.0, 0.0); n0];
            for i1 in 0..n1 {
                for i0 in 0..n0 {
                    col[i0] = data[i0 * n1 + i1];
                }
                p0.process(&mut col);
                for i0 in 0..n0 {
                    data[i0 * n1 + i1] = col[i0];
                }
            }
        }
    }
}

/// Spectral antiderivative along an axis:
/// A(x) = int_{lo}^{x} f = c0 * (x - lo) + per(x) - per(lo)
/// where c0 is the mean and per the zero-mean periodic primitive.
pub struct Antiderivative {
    pub periodic: GridFunction,
    pub c0: Complex64,
    pub per_at_lo: Complex64,
    pub axis: usize,
}

impl Antiderivative {
    pub fn of(f: &GridFunction, axis: usize) -> Antiderivative {
        let g = &f.grid;
        let mut spec = f.spectrum();
        let mut c0 = Complex64::new(0.0, 0.0);
        for (idx, m) in spec.modes.iter_mut().enumerate() {
            let i_axis = if axis == 0 { idx / g.n[1] } else { idx % g.n[1] };
            let k = g.wavenumber(axis, i_axis);
            if i_axis == 0 {
                c0 = *m; // continuum-normalized mean integral
                *m = Complex64::new(0.0, 0.0);
            } else {
                *m /= Complex64::new(0.0, k);
            }
        }
        // c0 as returned is the full-line integral; convert to mean density
        let c0 = c0 / Complex64::new(g.comp.len(axis), 0.0);
        let periodic = spec.to_grid();
        let per_at_lo = periodic.data[0];
        Antiderivative {
            periodic,
            c0,
            per_at_lo,
            axis,
        }
    }

    /// Value of the antiderivative at a grid point (1D only).
    pub fn value_at_index(&self, idx: usize) -> Complex64 {
        let g = &self.periodic.grid;
        let x = g.x(self.axis, idx);
        self.c0 * (x - g.comp.lo[self.axis]) + self.periodic.data[idx] - self.per_at_lo
    }

    /// Band-limited value at an arbitrary coordinate (1D only).
    pub fn value_at(&self, x: f64) -> Complex64 {
        let g = &self.periodic.grid;
        let per = self.periodic.band_eval(&[x]);
        self.c0 * (x - g.comp.lo[self.axis]) + per - self.per_at_lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1() -> Arc<Grid> {
        Grid::new(BoxRegion::new_1d(-4.0, 4.0), 1 << 12).unwrap()
    }

    #[test]
    fn geometry_and_margins() {
        let g = grid1();
        assert_eq!(g.comp.lo[0], -6.0);
        assert_eq!(g.comp.hi[0], 6.0);
        assert!(Grid::with_margin(BoxRegion::new_1d(0.0, 1.0), 64, 0.1).is_err());
        assert!(Grid::new(BoxRegion::new_1d(0.0, 1.0), 100).is_err());
    }

    #[test]
    fn spectrum_roundtrip() {
        let g = grid1();
        let f = GridFunction::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        let back = f.spectrum().to_grid();
        let err = f.sub(&back).unwrap().max_abs();
        assert!(err < 1e-12, "roundtrip error {err}");
    }

    #[test]
    fn spectral_derivative_of_sin() {
        // sin has period 2*pi; the box [-6, 6] is not commensurate, so use a
        // periodic-compatible frequency k = 2*pi/12 * m
        let g = grid1();
        let k = 2.0 * PI / 12.0 * 8.0;
        let f = GridFunction::from_real_fn(g.clone(), |x| (k * x[0]).sin());
        let df = f.derivative(0, 1);
        let expect = GridFunction::from_real_fn(g, |x| k * (k * x[0]).cos());
        let err = df.sub(&expect).unwrap().max_abs();
        assert!(err < 1e-10 * k, "derivative error {err}");
    }

    #[test]
    fn derivative_of_smooth_bump_matches_closed_form() {
        let g = grid1();
        let s = 0.7;
        let f = GridFunction::from_real_fn(g.clone(), |x| (-x[0] * x[0] / (2.0 * s * s)).exp());
        let df = f.derivative(0, 1);
        let expect =
            GridFunction::from_real_fn(g, |x| -x[0] / (s * s) * (-x[0] * x[0] / (2.0 * s * s)).exp());
        let err = df.sub(&expect).unwrap().max_abs();
        assert!(err < 1e-10, "err {err}");
    }

    #[test]
    fn convolution_of_gaussians() {
        // N(0, a^2) * N(0, b^2) = sqrt(2 pi) a b / sqrt(a^2+b^2) * N(0, a^2 + b^2)
        // with unnormalized e^{-x^2/(2s^2)} kernels
        let g = grid1();
        let a = 0.3;
        let b = 0.4;
        let fa = GridFunction::from_real_fn(g.clone(), |x| (-x[0] * x[0] / (2.0 * a * a)).exp());
        let fb = GridFunction::from_real_fn(g.clone(), |x| (-x[0] * x[0] / (2.0 * b * b)).exp());
        let conv = fa.spectrum().convolve(&fb.spectrum()).unwrap().to_grid();
        let s2 = a * a + b * b;
        let coeff = (2.0 * PI).sqrt() * a * b / s2.sqrt();
        let expect = GridFunction::from_real_fn(g, |x| coeff * (-x[0] * x[0] / (2.0 * s2)).exp());
        let err = conv.sub(&expect).unwrap().max_abs();
        assert!(err < 1e-10, "conv error {err}");
    }

    #[test]
    fn band_eval_matches_closed_form_off_grid() {
        let g = grid1();
        let k = 2.0 * PI / 12.0 * 5.0;
        let f = GridFunction::from_real_fn(g, |x| (k * x[0]).cos());
        for &x in &[0.1234567, -2.71828, 3.3333] {
            let v = f.band_eval(&[x]);
            assert!((v.re - (k * x).cos()).abs() < 1e-11);
            assert!(v.im.abs() < 1e-11);
        }
    }

    #[test]
    fn interp8_accuracy_on_smooth_function() {
        let g = grid1();
        let f = GridFunction::from_real_fn(g, |x| (-x[0] * x[0] / 2.0).exp() * (3.0 * x[0]).cos());
        for &x in &[0.05, 1.234, -2.6181] {
            let v = f.interp8(&[x]).re;
            let expect = (-x * x / 2.0f64).exp() * (3.0 * x).cos();
            assert!((v - expect).abs() < 1e-10, "x={x}: {v} vs {expect}");
        }
    }

    #[test]
    fn antiderivative_of_gaussian_matches_erf() {
        let g = grid1();
        let s = 0.5;
        let f = GridFunction::from_real_fn(g.clone(), |x| (-x[0] * x[0] / (2.0 * s * s)).exp());
        let anti = Antiderivative::of(&f, 0);
        // independent oracle: adaptive Simpson quadrature of the closed form
        let target = |x: f64| {
            crate::calculus::quadrature::adaptive_simpson(
                &|t: f64| (-t * t / (2.0 * s * s)).exp(),
                -6.0,
                x,
                1e-12,
            )
        };
        for &x in &[-1.0, 0.0, 0.333, 2.5] {
            let v = anti.value_at(x).re;
            let t = target(x);
            assert!((v - t).abs() < 1e-10, "x={x}: {v} vs {t}");
        }
    }

    #[test]
    fn tail_fraction_flags_unresolved_content() {
        let g = Grid::new(BoxRegion::new_1d(-4.0, 4.0), 256).unwrap();
        let smooth = GridFunction::from_real_fn(g.clone(), |x| (-x[0] * x[0]).exp());
        assert!(smooth.spectral_tail_fraction() < 1e-10);
        let rough = GridFunction::from_real_fn(g, |x| if x[0] > 0.0 { 1.0 } else { 0.0 });
        assert!(rough.spectral_tail_fraction() > 1e-4);
    }

    #[test]
    fn two_dimensional_roundtrip_and_derivative() {
        let g = Grid::new(
            BoxRegion::new_2d([-2.0, -2.0], [2.0, 2.0]),
            1 << 7,
        )
        .unwrap();
        // decays to 2e-16 at the periodic seam, so the periodization is clean
        let f = GridFunction::from_real_fn(g.clone(), |x| (-4.0 * (x[0] * x[0] + x[1] * x[1])).exp());
        let back = f.spectrum().to_grid();
        assert!(f.sub(&back).unwrap().max_abs() < 1e-12);
        let dfy = f.derivative(1, 1);
        let expect = GridFunction::from_real_fn(g, |x| {
            -8.0 * x[1] * (-4.0 * (x[0] * x[0] + x[1] * x[1])).exp()
        });
        assert!(dfy.sub(&expect).unwrap().max_abs() < 1e-9);
    }
}
