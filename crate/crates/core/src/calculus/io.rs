//! Grid function import/export: CSV rows (coordinates, re, im) and a raw
//! binary block (header: dims, N, box; payload: little-endian f64 pairs,
//! row-major).

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::grid::{BoxRegion, Grid, GridFunction};
use crate::error::{Error, Result};

/// CSV export: one row per sample, "x[,y],re,im".
pub fn write_csv(f: &GridFunction, out: &mut dyn Write) -> Result<()> {
    let g = &f.grid;
    if g.dim == 1 {
        writeln!(out, "x,re,im")?;
    } else {
        writeln!(out, "x,y,re,im")?;
    }
    for idx in 0..g.total_points() {
        let p = g.point(idx);
        let v = f.data[idx];
        if g.dim == 1 {
            writeln!(out, "{},{},{}", p[0], v.re, v.im)?;
        } else {
            writeln!(out, "{},{},{},{}", p[0], p[1], v.re, v.im)?;
        }
    }
    Ok(())
}

const MAGIC: &[u8; 8] = b"GFGRID01";

/// Raw binary export. Header: magic, dims (u32), N per axis (u32),
/// computational box lo/hi per axis (f64); payload: interleaved re, im
/// as little-endian f64 in row-major sample order.
pub fn write_binary(f: &GridFunction, out: &mut dyn Write) -> Result<()> {
    let g = &f.grid;
    out.write_all(MAGIC)?;
    out.write_all(&(g.dim as u32).to_le_bytes())?;
    out.write_all(&(g.n[0] as u32).to_le_bytes())?;
    for a in 0..g.dim {
        out.write_all(&g.comp.lo[a].to_le_bytes())?;
        out.write_all(&g.comp.hi[a].to_le_bytes())?;
    }
    for a in 0..g.dim {
        out.write_all(&g.domain.lo[a].to_le_bytes())?;
        out.write_all(&g.domain.hi[a].to_le_bytes())?;
    }
    for v in &f.data {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary(input: &mut dyn Read) -> Result<GridFunction> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Config("bad grid file magic".into()));
    }
    let mut u32buf = [0u8; 4];
    input.read_exact(&mut u32buf)?;
    let dim = u32::from_le_bytes(u32buf) as usize;
    if dim != 1 && dim != 2 {
        return Err(Error::Config(format!("bad dimension {dim}")));
    }
    input.read_exact(&mut u32buf)?;
    let n = u32::from_le_bytes(u32buf) as usize;
    let mut f64buf = [0u8; 8];
    let mut read_f64 = |input: &mut dyn Read| -> Result<f64> {
        input.read_exact(&mut f64buf)?;
        Ok(f64::from_le_bytes(f64buf))
    };
    let mut comp = BoxRegion {
        dim,
        lo: [0.0; 2],
        hi: [0.0; 2],
    };
    for a in 0..dim {
        comp.lo[a] = read_f64(input)?;
        comp.hi[a] = read_f64(input)?;
    }
    let mut domain = comp;
    for a in 0..dim {
        domain.lo[a] = read_f64(input)?;
        domain.hi[a] = read_f64(input)?;
    }
    let mut ns = [1usize; 2];
    for a in &mut ns[..dim] {
        *a = n;
    }
    let grid = Arc::new(Grid {
        dim,
        domain,
        comp,
        n: ns,
    });
    let total = grid.total_points();
    let mut data = Vec::with_capacity(total);
    for _ in 0..total {
        let re = read_f64(input)?;
        let im = read_f64(input)?;
        data.push(Complex64::new(re, im));
    }
    Ok(GridFunction { grid, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_roundtrip_preserves_samples_exactly() {
        let g = Grid::new(BoxRegion::new_1d(-4.0, 4.0), 256).unwrap();
        let f = GridFunction::from_real_fn(g, |x| (x[0] * 1.7).sin());
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        let back = read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(f.data, back.data);
        assert!(f.grid.same_geometry(&back.grid));
    }

    #[test]
    fn csv_has_expected_header() {
        let g = Grid::new(BoxRegion::new_1d(-1.0, 1.0), 64).unwrap();
        let f = GridFunction::zero(g);
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,re,im\n"));
    }
}
