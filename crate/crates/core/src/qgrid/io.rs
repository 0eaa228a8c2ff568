use std::io::{self, Read, Write};

use num_complex::Complex64;

use super::eigen::Eigenpair;
use super::evolve::Evolution;
use super::wave::WaveFunction;
use crate::error::GridError;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"FRQ1";

/// `index,eigenvalue,residual` rows.
pub fn write_spectrum_csv(out: &mut impl Write, pairs: &[Eigenpair]) -> io::Result<()> {
    writeln!(out, "index,eigenvalue,residual")?;
    for (i, p) in pairs.iter().enumerate() {
        writeln!(out, "{i},{:.11e},{:.11e}", p.value, p.residual)?;
    }
    Ok(())
}

/// `t,norm,<observable>...` rows.
pub fn write_evolution_csv(out: &mut impl Write, ev: &Evolution) -> io::Result<()> {
    write!(out, "t,norm")?;
    for (name, _) in &ev.observables {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for (i, t) in ev.times.iter().enumerate() {
        write!(out, "{t:.11e},{:.11e}", ev.norms[i])?;
        for (_, series) in &ev.observables {
            write!(out, ",{:.11e}", series[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Binary snapshot: magic, three little-endian `u32` axis lengths (0 for
/// absent axes), then interleaved little-endian `f64` real and imaginary parts.
pub fn write_snapshot(out: &mut impl Write, psi: &WaveFunction) -> io::Result<()> {
    out.write_all(SNAPSHOT_MAGIC)?;
    let shape = psi.grid().shape();
    for k in 0..3 {
        let n = shape.get(k).copied().unwrap_or(0) as u32;
        out.write_all(&n.to_le_bytes())?;
    }
    for v in psi.values() {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a snapshot back as its shape and nodal values.
pub fn read_snapshot(input: &mut impl Read) -> Result<(Vec<usize>, Vec<Complex64>), GridError> {
    let err = |e: io::Error| GridError::Snapshot(e.to_string());
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(err)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(GridError::Snapshot("bad magic".into()));
    }
    let mut shape = Vec::new();
    for _ in 0..3 {
        let mut b = [0u8; 4];
        input.read_exact(&mut b).map_err(err)?;
        let n = u32::from_le_bytes(b) as usize;
        if n > 0 {
            shape.push(n);
        }
    }
    if shape.is_empty() {
        return Err(GridError::Snapshot("no axes".into()));
    }
    let size: usize = shape.iter().product();
    let mut values = Vec::with_capacity(size);
    let mut b = [0u8; 16];
    for _ in 0..size {
        input.read_exact(&mut b).map_err(err)?;
        let re = f64::from_le_bytes(b[..8].try_into().unwrap());
        let im = f64::from_le_bytes(b[8..].try_into().unwrap());
        values.push(Complex64::new(re, im));
    }
    if input.read(&mut b).map_err(err)? != 0 {
        return Err(GridError::Snapshot("trailing bytes".into()));
    }
    Ok((shape, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qgrid::grid::{Axis, Grid, Stencil};
    use std::sync::Arc;

    #[test]
    fn snapshot_round_trip() {
        let g = Arc::new(Grid::new(vec![Axis::circle(1.0, 8), Axis::dirichlet(0.0, 1.0, 9)], Stencil::Central(2)).unwrap());
        let psi = WaveFunction::from_fn(&g, |q| Complex64::new(q[0], -q[1]));
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &psi).unwrap();
        assert_eq!(buf.len(), 16 + 72 * 16);
        assert_eq!(&buf[4..16], &[8, 0, 0, 0, 9, 0, 0, 0, 0, 0, 0, 0]);
        let (shape, values) = read_snapshot(&mut buf.as_slice()).unwrap();
        assert_eq!(shape, vec![8, 9]);
        assert_eq!(values, psi.values());
        buf[0] = b'X';
        assert!(read_snapshot(&mut buf.as_slice()).is_err());
    }
}
