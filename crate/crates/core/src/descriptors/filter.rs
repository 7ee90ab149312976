use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the magnitude threshold for dropping cuboids is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterThreshold {
    /// Drop columns whose ℓ2 norm is at most this value.
    Fixed(f64),
    /// Calibrate the threshold so that this fraction of the weakest columns
    /// is dropped.
    DropFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L1,
    #[default]
    L2,
}

/// Concrete threshold for `descs` under `rule`.
///
/// For `DropFraction(f)` the threshold is the norm of the `floor(f * n)`-th
/// weakest column (0 when that count is zero), so ties at the cut may drop a
/// few more.
pub fn resolve_threshold(descs: &DMatrix<f64>, rule: FilterThreshold) -> f64 {
    match rule {
        FilterThreshold::Fixed(t) => t,
        FilterThreshold::DropFraction(f) => {
            let mut norms: Vec<f64> = descs.column_iter().map(|c| c.norm()).collect();
            norms.sort_by(f64::total_cmp);
            let k = (f.clamp(0.0, 1.0) * norms.len() as f64).floor() as usize;
            if k == 0 {
                0.0
            } else {
                norms[k - 1]
            }
        }
    }
}

/// Drop columns with ℓ2 norm `<= threshold` and rescale the rest to unit
/// norm, keeping column order.
pub fn filter_and_normalize(
    descs: &DMatrix<f64>,
    threshold: f64,
    norm: Norm,
) -> Result<DMatrix<f64>> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid(format!("threshold must be >= 0, got {threshold}")));
    }
    let kept: Vec<usize> = descs
        .column_iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > threshold)
        .map(|(j, _)| j)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyResult(format!(
            "all {} descriptors fall below threshold {threshold}",
            descs.ncols()
        )));
    }
    let mut out = descs.select_columns(&kept);
    for mut c in out.column_iter_mut() {
        let n = match norm {
            Norm::L2 => c.norm(),
            Norm::L1 => c.iter().map(|v| v.abs()).sum(),
        };
        c /= n;
    }
    Ok(out)
}
