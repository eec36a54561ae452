//! Binary field snapshots.
//!
//! Fixed little-endian layout (bit-exact contract shared by the CLI, the
//! `from_file` initial state, and file-based potentials):
//!
//! ```text
//! 16 bytes  magic "GPSAVFLD" + 7 zero bytes + version byte 0x01
//! u32       dim
//! u32 × 3   sizes (unused axes stored as 1)
//! f64 × 3   lower bounds (unused axes stored as 0)
//! f64 × 3   upper bounds (unused axes stored as 0)
//! f64       time
//! f64       q
//! f64 × 2N  interleaved (re, im) pairs, x-fastest order
//! ```

use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;

pub const MAGIC: [u8; 16] = *b"GPSAVFLD\0\0\0\0\0\0\0\x01";

/// A field together with the simulation time and SAV value it was taken at.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub field: Field,
    pub time: f64,
    pub q: f64,
}

pub fn write(path: &Path, field: &Field, time: f64, q: f64) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    let grid = field.grid();

    w.write_all(&MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for axis in 0..3 {
        let n = if axis < grid.dim() {
            grid.sizes()[axis] as u32
        } else {
            1
        };
        w.write_all(&n.to_le_bytes())?;
    }
    for axis in 0..3 {
        let lo = if axis < grid.dim() { grid.lower()[axis] } else { 0.0 };
        w.write_all(&lo.to_le_bytes())?;
    }
    for axis in 0..3 {
        let hi = if axis < grid.dim() { grid.upper()[axis] } else { 0.0 };
        w.write_all(&hi.to_le_bytes())?;
    }
    w.write_all(&time.to_le_bytes())?;
    w.write_all(&q.to_le_bytes())?;
    for z in field.data() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn read(path: &Path) -> Result<Snapshot> {
    read_inner(path).map_err(|e| match e {
        // running out of bytes mid-parse is a malformed file, not an i/o fault
        Error::Io(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => Error::Format(format!(
            "{}: truncated snapshot",
            path.display()
        )),
        other => other,
    })
}

fn read_inner(path: &Path) -> Result<Snapshot> {
    let file = File::open(path)?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 16];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(Error::Format(format!(
            "{}: bad magic (not a field snapshot or wrong version)",
            path.display()
        )));
    }
    let dim = read_u32(&mut r)? as usize;
    if dim == 0 || dim > 3 {
        return Err(Error::Format(format!("{}: dim {dim} out of range", path.display())));
    }
    let mut sizes = [0u32; 3];
    for s in sizes.iter_mut() {
        *s = read_u32(&mut r)?;
    }
    let mut lower = [0f64; 3];
    for v in lower.iter_mut() {
        *v = read_f64(&mut r)?;
    }
    let mut upper = [0f64; 3];
    for v in upper.iter_mut() {
        *v = read_f64(&mut r)?;
    }
    let time = read_f64(&mut r)?;
    let q = read_f64(&mut r)?;

    for axis in dim..3 {
        if sizes[axis] != 1 {
            return Err(Error::Format(format!(
                "{}: unused axis {axis} must have size 1",
                path.display()
            )));
        }
    }
    let sizes_v: Vec<usize> = sizes[..dim].iter().map(|&n| n as usize).collect();
    let grid = Grid::new(&sizes_v, &lower[..dim], &upper[..dim])
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;

    let n: usize = sizes_v.iter().product();
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        data.push(Complex64::new(re, im));
    }
    let mut tail = [0u8; 1];
    if r.read(&mut tail)? != 0 {
        return Err(Error::Format(format!(
            "{}: trailing bytes after field data",
            path.display()
        )));
    }

    let field = Field::from_data(&Arc::new(grid), data)?;
    Ok(Snapshot { field, time, q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sample_field(dim: usize) -> Field {
        let sizes: Vec<usize> = (0..dim).map(|a| 4 + 2 * a).collect();
        let lower = vec![-1.0; dim];
        let upper = vec![2.0; dim];
        let grid = Arc::new(Grid::new(&sizes, &lower, &upper).unwrap());
        Field::from_fn(&grid, |x| {
            Complex64::new((PI * x[0]).sin(), x.iter().sum::<f64>())
        })
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        for dim in 1..=3 {
            let f = sample_field(dim);
            let path = dir.path().join(format!("f{dim}.gpfld"));
            write(&path, &f, 1.25, 0.75).unwrap();
            let snap = read(&path).unwrap();
            assert_eq!(snap.time, 1.25);
            assert_eq!(snap.q, 0.75);
            assert!(snap.field.grid().same_layout(f.grid()));
            assert_eq!(snap.field.data(), f.data());

            // writing again reproduces the file byte for byte
            let path2 = dir.path().join(format!("g{dim}.gpfld"));
            write(&path2, &snap.field, snap.time, snap.q).unwrap();
            assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
        }
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.gpfld");
        std::fs::write(&path, b"not a snapshot").unwrap();
        assert!(read(&path).is_err());

        let f = sample_field(1);
        let good = dir.path().join("good.gpfld");
        write(&good, &f, 0.0, 1.0).unwrap();
        let bytes = std::fs::read(&good).unwrap();
        let cut = dir.path().join("cut.gpfld");
        std::fs::write(&cut, &bytes[..bytes.len() - 5]).unwrap();
        assert!(read(&cut).is_err());
        let long = dir.path().join("long.gpfld");
        let mut extended = bytes.clone();
        extended.push(0);
        std::fs::write(&long, &extended).unwrap();
        assert!(matches!(read(&long), Err(Error::Format(_))));
    }
}
