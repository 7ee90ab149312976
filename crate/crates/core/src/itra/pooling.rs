use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse_solvers::SparseCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolMode {
    #[default]
    Signed,
    Absolute,
}

/// Contiguous blocks of the given sizes, starting at zero.
pub fn blocks_of(sizes: impl IntoIterator<Item = usize>) -> Vec<Range<usize>> {
    let mut at = 0;
    sizes
        .into_iter()
        .map(|s| {
            let r = at..at + s;
            at += s;
            r
        })
        .collect()
}

/// Sum the code coefficients falling inside each block.
///
/// `blocks` must tile `0..coefficients.len()` in order without gaps or
/// overlaps.
pub fn sum_pool(code: &SparseCode, blocks: &[Range<usize>], mode: PoolMode) -> Result<Vec<f64>> {
    let n = code.coefficients.len();
    let mut expected = 0;
    for b in blocks {
        if b.start != expected || b.end < b.start {
            return Err(Error::invalid(format!(
                "pooling blocks must tile 0..{n} in order; got {b:?} at {expected}"
            )));
        }
        expected = b.end;
    }
    if expected != n {
        return Err(Error::invalid(format!(
            "pooling blocks cover 0..{expected}, code has {n} coefficients"
        )));
    }
    let c = &code.coefficients;
    Ok(blocks
        .iter()
        .map(|b| match mode {
            PoolMode::Signed => c.rows_range(b.clone()).sum(),
            PoolMode::Absolute => c.rows_range(b.clone()).iter().map(|v| v.abs()).sum(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn code(v: &[f64]) -> SparseCode {
        SparseCode {
            coefficients: DVector::from_column_slice(v),
            support: vec![],
            residual_norm: 0.0,
            residual_trace: vec![],
        }
    }

    #[test]
    fn pairs() {
        let c = code(&[1.0, -0.5, 0.0, 2.0]);
        let b = blocks_of([2, 2]);
        assert_eq!(sum_pool(&c, &b, PoolMode::Signed).unwrap(), vec![0.5, 2.0]);
        assert_eq!(sum_pool(&c, &b, PoolMode::Absolute).unwrap(), vec![1.5, 2.0]);
        assert_eq!(sum_pool(&code(&[0.0; 4]), &b, PoolMode::Signed).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn bad_partitions() {
        let c = code(&[1.0, 2.0, 3.0]);
        assert!(sum_pool(&c, &[0..2], PoolMode::Signed).is_err());
        assert!(sum_pool(&c, &[0..2, 1..3], PoolMode::Signed).is_err());
        assert!(sum_pool(&c, &[0..1, 2..3], PoolMode::Signed).is_err());
        assert!(sum_pool(&c, &[0..1, 1..4], PoolMode::Signed).is_err());
    }
}
