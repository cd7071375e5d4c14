use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Grid, ScalarField};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"LOGOBS1\0";

pub fn write_field<W: Write>(field: &ScalarField, mut w: W) -> Result<()> {
    let g = field.grid();
    let dim = g.dim();
    w.write_all(MAGIC)?;
    w.write_all(&(dim as u32).to_le_bytes())?;
    for axis in 0..dim {
        w.write_all(&(g.counts()[axis] as u32).to_le_bytes())?;
    }
    for axis in 0..dim {
        w.write_all(&g.origin()[axis].to_le_bytes())?;
    }
    w.write_all(&g.spacing().to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_field<R: Read>(mut r: R) -> Result<ScalarField> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let dim = read_u32(&mut r)? as usize;
    if dim != 1 && dim != 2 {
        return Err(Error::Format(format!("unsupported dimension {dim}")));
    }
    let mut counts = [1usize; 2];
    for c in counts.iter_mut().take(dim) {
        *c = read_u32(&mut r)? as usize;
    }
    let mut origin = [0.0; 2];
    for o in origin.iter_mut().take(dim) {
        *o = read_f64(&mut r)?;
    }
    let h = read_f64(&mut r)?;
    let grid = if dim == 1 { Grid::line(origin[0], h, counts[0])? } else { Grid::plane(origin, h, counts)? };
    let mut bytes = vec![0u8; grid.len() * 8];
    r.read_exact(&mut bytes).map_err(|_| Error::Format(format!("expected {} values", grid.len())))?;
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes".into()));
    }
    ScalarField::new(grid, values)
}

pub fn save_field(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    write_field(field, BufWriter::new(File::create(path)?))
}

pub fn load_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    read_field(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let grid = Grid::plane([-0.3, 0.7], 0.013, [5, 4]).unwrap();
        let f = ScalarField::from_fn(grid, |p| (p[0] * 13.1).sin() * 1e-7 + p[1].exp()).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 8 + 16 + 8 + 20 * 8);
        let g = read_field(buf.as_slice()).unwrap();
        assert_eq!(f.grid(), g.grid());
        let same = f.values().iter().zip(g.values()).all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same);
    }

    #[test]
    fn one_dimensional_layout() {
        let f = ScalarField::from_fn(Grid::line(0.0, 0.25, 5).unwrap(), |p| p[0]).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 5);
        assert_eq!(read_field(buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn corrupt_input_rejected() {
        assert!(matches!(read_field(&b"NOTAFILE"[..]), Err(Error::Format(_))));
        let f = ScalarField::from_fn(Grid::line(0.0, 0.25, 5).unwrap(), |p| p[0]).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_field(buf.as_slice()).is_err());
    }
}
