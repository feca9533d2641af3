//! Standard probe objects used by verification sweeps: smooth probes for
//! convergence checks, distribution probes for growth checks, and compactly
//! supported dual probes for weak-convergence checks.

use std::sync::Arc;

use crate::calculus::dist::DistributionRep;
use crate::calculus::grid::{BoxRegion, Grid, GridFunction};
use crate::calculus::mask::SmoothMask;
use crate::error::{Error, Result};

/// Named smooth probe; `gevrey_q` controls the bump transition class.
pub fn smooth_probe(grid: &Arc<Grid>, name: &str) -> Result<GridFunction> {
    let g = grid.clone();
    match name {
        "one" => Ok(GridFunction::from_real_fn(g, |_| 1.0)),
        // unit-frequency sine killed by a plateau before the periodic seam;
        // equals sin(x) exactly on the domain interior
        "sin" => {
            let mask = seam_guard(grid);
            Ok(GridFunction::from_real_fn(g, move |x| {
                x[0].sin() * mask.eval(x)
            }))
        }
        // periodic-commensurate sine: exactly representable on the grid
        "sin-periodic" => {
            let k = 2.0 * std::f64::consts::PI / (grid.comp.len(0)) * 6.0;
            Ok(GridFunction::from_real_fn(g, move |x| (k * x[0]).sin()))
        }
        "gaussian" => Ok(GridFunction::from_real_fn(g, |x| {
            let q: f64 = x.iter().map(|v| v * v).sum();
            (-q / (2.0 * 0.25)).exp()
        })),
        "bump" => {
            let dim = grid.dim;
            let core = shrink_box(&grid.domain, 0.55, dim);
            let supp = shrink_box(&grid.domain, 0.35, dim);
            let mask = SmoothMask::plateau(&core, &supp, 1.0);
            Ok(GridFunction::from_real_fn(g, move |x| mask.eval(x)))
        }
        // narrower bump for dual pairing probes
        "bump-narrow" => {
            let dim = grid.dim;
            let core = centered_box(grid, 0.8, dim);
            let supp = centered_box(grid, 1.6, dim);
            let mask = SmoothMask::plateau(&core, &supp, 1.0);
            Ok(GridFunction::from_real_fn(g, move |x| mask.eval(x)))
        }
        // compactly supported oscillating probes for product identities
        "sinbump" => {
            let dim = grid.dim;
            let core = shrink_box(&grid.domain, 0.55, dim);
            let supp = shrink_box(&grid.domain, 0.35, dim);
            let mask = SmoothMask::plateau(&core, &supp, 1.0);
            Ok(GridFunction::from_real_fn(g, move |x| {
                x[0].sin() * mask.eval(x)
            }))
        }
        "cosbump" => {
            let dim = grid.dim;
            let core = shrink_box(&grid.domain, 0.55, dim);
            let supp = shrink_box(&grid.domain, 0.35, dim);
            let mask = SmoothMask::plateau(&core, &supp, 1.0);
            Ok(GridFunction::from_real_fn(g, move |x| {
                x[0].cos() * mask.eval(x)
            }))
        }
        // the exact pointwise product of the two probes above
        "sincosbump2" => {
            let a = smooth_probe(grid, "sinbump")?;
            let b = smooth_probe(grid, "cosbump")?;
            a.mul(&b)
        }
        other => Err(Error::Config(format!("unknown smooth probe {other:?}"))),
    }
}

/// Plateau bump supported strictly inside the given box.
pub fn bump_in(grid: &Arc<Grid>, region: &BoxRegion) -> GridFunction {
    let dim = grid.dim;
    let mut core = *region;
    let mut supp = *region;
    for a in 0..dim {
        let len = region.len(a);
        core.lo[a] += 0.3 * len;
        core.hi[a] -= 0.3 * len;
        supp.lo[a] += 0.1 * len;
        supp.hi[a] -= 0.1 * len;
    }
    let mask = SmoothMask::plateau(&core, &supp, 1.0);
    GridFunction::from_real_fn(grid.clone(), move |x| mask.eval(x))
}

/// Plateau covering the whole domain, vanishing inside the periodic margin.
pub fn seam_guard(grid: &Arc<Grid>) -> SmoothMask {
    let dim = grid.dim;
    let mut core = grid.domain;
    let mut supp = grid.domain;
    for a in 0..dim {
        let m = 0.5 * (grid.domain.lo[a] - grid.comp.lo[a]);
        supp.lo[a] -= 1.6 * m;
        supp.hi[a] += 1.6 * m;
        core.lo[a] -= 0.2 * m;
        core.hi[a] += 0.2 * m;
    }
    SmoothMask::plateau(&core, &supp, 1.0)
}

fn shrink_box(b: &BoxRegion, frac: f64, dim: usize) -> BoxRegion {
    let mut r = *b;
    for a in 0..dim {
        let m = frac * 0.5 * b.len(a);
        r.lo[a] += m;
        r.hi[a] -= m;
    }
    r
}

fn centered_box(grid: &Arc<Grid>, half: f64, dim: usize) -> BoxRegion {
    let mut r = grid.domain;
    for a in 0..dim {
        let c = 0.5 * (grid.domain.lo[a] + grid.domain.hi[a]);
        r.lo[a] = c - half;
        r.hi[a] = c + half;
    }
    r
}

/// Named distribution probe from the atom vocabulary:
/// "delta@x0", "ddelta@x0:m", "heaviside@x0", "density:<name>", "smooth:<name>".
pub fn distribution_probe(grid: &Arc<Grid>, name: &str) -> Result<DistributionRep> {
    if let Some(rest) = name.strip_prefix("delta@") {
        let point = parse_point(rest, grid.dim)?;
        return Ok(DistributionRep::delta(grid.clone(), point));
    }
    if let Some(rest) = name.strip_prefix("ddelta@") {
        let (loc, ord) = rest
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("ddelta needs 'point:order' in {name:?}")))?;
        let point = parse_point(loc, grid.dim)?;
        let m: usize = ord
            .parse()
            .map_err(|_| Error::Config(format!("bad derivative order in {name:?}")))?;
        return Ok(DistributionRep::delta_derivative(grid.clone(), point, [m, 0]));
    }
    if let Some(rest) = name.strip_prefix("heaviside@") {
        let v: f64 = rest
            .parse()
            .map_err(|_| Error::Config(format!("bad jump point in {name:?}")))?;
        return Ok(DistributionRep::heaviside(grid.clone(), 0, v));
    }
    if let Some(rest) = name.strip_prefix("density:") {
        return Ok(DistributionRep::smooth(smooth_probe(grid, rest)?));
    }
    if let Some(rest) = name.strip_prefix("smooth:") {
        return Ok(DistributionRep::smooth(smooth_probe(grid, rest)?));
    }
    Err(Error::Config(format!("unknown atom {name:?}")))
}

fn parse_point(text: &str, dim: usize) -> Result<[f64; 2]> {
    let mut p = [0.0; 2];
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != dim {
        return Err(Error::Config(format!(
            "point {text:?} has {} coordinates, domain has {dim}",
            parts.len()
        )));
    }
    for (a, part) in parts.iter().enumerate() {
        p[a] = part
            .parse()
            .map_err(|_| Error::Config(format!("bad coordinate in {text:?}")))?;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_vocabulary_parses() {
        let g = Grid::new(BoxRegion::new_1d(-4.0, 4.0), 1 << 10).unwrap();
        assert!(distribution_probe(&g, "delta@0").is_ok());
        assert!(distribution_probe(&g, "ddelta@0.5:1").is_ok());
        assert!(distribution_probe(&g, "heaviside@0.25").is_ok());
        assert!(distribution_probe(&g, "density:gaussian").is_ok());
        assert!(distribution_probe(&g, "smooth:sin").is_ok());
        assert!(distribution_probe(&g, "nonsense@3").is_err());
    }

    #[test]
    fn bump_is_compactly_supported() {
        let g = Grid::new(BoxRegion::new_1d(-4.0, 4.0), 1 << 12).unwrap();
        let b = smooth_probe(&g, "bump-narrow").unwrap();
        // vanishes outside [-1.6, 1.6]
        for idx in 0..g.total_points() {
            let p = g.point(idx);
            if p[0].abs() > 1.65 {
                assert_eq!(b.data[idx].norm(), 0.0);
            }
        }
        assert!((b.band_eval(&[0.0]).re - 1.0).abs() < 1e-12);
    }
}
