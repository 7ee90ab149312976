//! Little-endian primitives and the generic matrix container.
//!
//! Matrix layout: magic `MATX`, u32 version = 1, u32 rows, u32 cols, then
//! `rows * cols` little-endian f64 values in column-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const MATRIX_MAGIC: &[u8; 4] = b"MATX";
const MATRIX_VERSION: u32 = 1;

pub(crate) fn write_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn write_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub(crate) fn to_u32(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::invalid(format!("{what} = {n} exceeds u32")))
}

pub fn write_matrix<W: Write>(w: &mut W, m: &DMatrix<f64>) -> Result<()> {
    w.write_all(MATRIX_MAGIC)?;
    write_u32(w, MATRIX_VERSION)?;
    write_u32(w, to_u32(m.nrows(), "rows")?)?;
    write_u32(w, to_u32(m.ncols(), "cols")?)?;
    for &v in m.as_slice() {
        write_f64(w, v)?;
    }
    Ok(())
}

pub fn read_matrix<R: Read>(r: &mut R) -> Result<DMatrix<f64>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MATRIX_MAGIC {
        return Err(Error::format("MATX", "bad magic"));
    }
    let version = read_u32(r)?;
    if version != MATRIX_VERSION {
        return Err(Error::format("MATX", format!("unsupported version {version}")));
    }
    let rows = read_u32(r)? as usize;
    let cols = read_u32(r)? as usize;
    let mut data = vec![0.0; rows * cols];
    for v in &mut data {
        *v = read_f64(r)?;
    }
    Ok(DMatrix::from_vec(rows, cols, data))
}

pub fn save_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::from(e).at(path))?);
    write_matrix(&mut w, m)?;
    w.flush()?;
    Ok(())
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::from(e).at(path))?;
    read_matrix(&mut BufReader::new(f)).map_err(|e| e.at(path))
}

/// Hex SHA-256 of the JSON encoding of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("configuration serialises to JSON");
    hex::encode(Sha256::digest(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = DMatrix::from_fn(3, 2, |i, j| i as f64 - 0.5 * j as f64);
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        assert_eq!(buf.len(), 16 + 48);
        assert_eq!(read_matrix(&mut buf.as_slice()).unwrap(), m);
        buf[0] = b'X';
        assert!(read_matrix(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn empty_matrix_round_trip() {
        let m = DMatrix::<f64>::zeros(12, 0);
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        assert_eq!(read_matrix(&mut buf.as_slice()).unwrap().shape(), (12, 0));
    }
}
