use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_f64, read_u32, write_f64, write_u32};

const MAGIC: &[u8; 4] = b"DICT";
const VERSION: u32 = 1;
const ABSENT: u32 = u32::MAX;

/// Column norms may deviate from one by at most this much.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Optional class and position labels carried by a dictionary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryMeta {
    pub class_id: Option<u32>,
    pub position: Option<u32>,
}

/// A set of unit-norm atoms stored as the columns of an `m x n_a` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: DMatrix<f64>,
    pub meta: DictionaryMeta,
}

impl Dictionary {
    /// Wrap an atom matrix whose columns are already unit-norm.
    pub fn new(atoms: DMatrix<f64>) -> Result<Self> {
        if atoms.ncols() == 0 || atoms.nrows() == 0 {
            return Err(Error::InvalidDictionary("dictionary has no atoms".into()));
        }
        for (j, col) in atoms.column_iter().enumerate() {
            let n = col.norm();
            if !n.is_finite() || (n - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::InvalidDictionary(format!(
                    "atom {j} has norm {n}, expected 1"
                )));
            }
        }
        Ok(Self {
            atoms,
            meta: DictionaryMeta::default(),
        })
    }

    /// Normalise every column of `atoms`; zero columns are rejected.
    pub fn from_unnormalized(mut atoms: DMatrix<f64>) -> Result<Self> {
        for (j, mut col) in atoms.column_iter_mut().enumerate() {
            let n = col.norm();
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::InvalidDictionary(format!("atom {j} has zero norm")));
            }
            col /= n;
        }
        Self::new(atoms)
    }

    pub fn with_meta(mut self, meta: DictionaryMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn atoms(&self) -> &DMatrix<f64> {
        &self.atoms
    }

    /// Signal dimension `m`.
    pub fn dim(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.ncols()
    }

    /// Horizontal concatenation `[D_1 | D_2 | ...]`; metadata is dropped.
    pub fn concat<'a, I>(parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Dictionary>,
    {
        let parts: Vec<&Dictionary> = parts.into_iter().collect();
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidDictionary("nothing to concatenate".into()))?;
        let m = first.dim();
        if parts.iter().any(|d| d.dim() != m) {
            return Err(Error::InvalidDictionary(
                "concatenated dictionaries differ in signal dimension".into(),
            ));
        }
        let total: usize = parts.iter().map(|d| d.n_atoms()).sum();
        let mut atoms = DMatrix::zeros(m, total);
        let mut at = 0;
        for d in &parts {
            atoms.columns_mut(at, d.n_atoms()).copy_from(&d.atoms);
            at += d.n_atoms();
        }
        Ok(Self {
            atoms,
            meta: DictionaryMeta::default(),
        })
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        write_u32(w, VERSION)?;
        write_u32(w, dim_u32(self.dim())?)?;
        write_u32(w, dim_u32(self.n_atoms())?)?;
        // nalgebra storage is column-major already
        for &v in self.atoms.as_slice() {
            write_f64(w, v)?;
        }
        write_u32(w, self.meta.class_id.unwrap_or(ABSENT))?;
        write_u32(w, self.meta.position.unwrap_or(ABSENT))?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::format("DICT", "bad magic"));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::format("DICT", format!("unsupported version {version}")));
        }
        let m = read_u32(r)? as usize;
        let n_a = read_u32(r)? as usize;
        let mut data = Vec::with_capacity(m * n_a);
        for _ in 0..m * n_a {
            data.push(read_f64(r)?);
        }
        let atoms = DMatrix::from_vec(m, n_a, data);
        let mut meta = DictionaryMeta::default();
        // the metadata block is optional
        let mut block = [0u8; 8];
        match read_full_or_eof(r, &mut block)? {
            0 => {}
            8 => {
                let tag = |b: &[u8]| {
                    let v = u32::from_le_bytes(b.try_into().unwrap());
                    (v != ABSENT).then_some(v)
                };
                meta.class_id = tag(&block[..4]);
                meta.position = tag(&block[4..]);
            }
            n => return Err(Error::format("DICT", format!("truncated metadata ({n} bytes)"))),
        }
        Ok(Self::new(atoms)?.with_meta(meta))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = BufWriter::new(File::create(path).map_err(|e| Error::from(e).at(path))?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::from(e).at(path))?;
        Self::read_from(&mut BufReader::new(f)).map_err(|e| e.at(path))
    }
}

fn dim_u32(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::invalid(format!("dimension {n} exceeds u32")))
}

fn read_full_or_eof<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..])? {
            0 => break,
            n => filled += n,
        }
    }
    Ok(filled)
}
