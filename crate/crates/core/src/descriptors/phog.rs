use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::gradient::{cell_of, diff};
use crate::error::{Error, Result};
use crate::video::Frame;

/// Pyramid of histograms of oriented gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhogConfig {
    /// Pyramid levels; level `l` splits the frame into a `2^l x 2^l` grid.
    pub levels: Vec<u32>,
    pub bins: usize,
    /// Orientations over `[0, 2π)` instead of `[0, π)`.
    pub signed: bool,
}

impl Default for PhogConfig {
    fn default() -> Self {
        Self {
            levels: vec![0, 1, 2],
            bins: 9,
            signed: false,
        }
    }
}

impl PhogConfig {
    /// Descriptor length `bins * sum_l 4^l`.
    pub fn dim(&self) -> usize {
        self.bins * self.levels.iter().map(|&l| 1usize << (2 * l)).sum::<usize>()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 {
            return Err(Error::invalid("PHOG needs at least 2 bins"));
        }
        if self.levels.is_empty() || self.levels.iter().any(|&l| l > 8) {
            return Err(Error::invalid("PHOG levels must be non-empty and <= 8"));
        }
        Ok(())
    }
}

/// PHOG descriptor of one frame. Each pyramid level is ℓ1-normalised on its
/// own; all-zero levels stay zero.
pub fn phog(frame: &Frame, cfg: &PhogConfig) -> Result<DVector<f64>> {
    cfg.validate()?;
    let (w, h) = (frame.width(), frame.height());
    if w < 2 || h < 2 {
        return Err(Error::invalid(format!("frame {w}x{h} is smaller than 2x2")));
    }
    let range = if cfg.signed { 2.0 * PI } else { PI };
    let px = |x: usize, y: usize| frame.get(x, y) as f64;

    // orientation bin and magnitude per pixel
    let mut bin_of = vec![0usize; w * h];
    let mut mag = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let gx = diff(x, w, |i| px(i, y));
            let gy = diff(y, h, |j| px(x, j));
            let m = gx.hypot(gy);
            if m == 0.0 {
                continue;
            }
            let mut theta = gy.atan2(gx).rem_euclid(range);
            if theta >= range {
                theta = 0.0;
            }
            let b = ((theta / range) * cfg.bins as f64) as usize;
            bin_of[y * w + x] = b.min(cfg.bins - 1);
            mag[y * w + x] = m;
        }
    }

    let mut out = DVector::zeros(cfg.dim());
    let mut offset = 0;
    for &level in &cfg.levels {
        let cells = 1usize << level;
        let len = cells * cells * cfg.bins;
        let mut block = out.rows_mut(offset, len);
        for y in 0..h {
            let cy = cell_of(y, h, cells);
            for x in 0..w {
                let m = mag[y * w + x];
                if m > 0.0 {
                    let cx = cell_of(x, w, cells);
                    block[(cy * cells + cx) * cfg.bins + bin_of[y * w + x]] += m;
                }
            }
        }
        let total: f64 = block.iter().sum();
        if total > 0.0 {
            block /= total;
        }
        offset += len;
    }
    Ok(out)
}

/// Stack per-frame PHOG descriptors as the columns of an `m x n` matrix.
pub fn phog_matrix(frames: &[Frame], cfg: &PhogConfig) -> Result<DMatrix<f64>> {
    let mut z = DMatrix::zeros(cfg.dim(), frames.len());
    for (j, f) in frames.iter().enumerate() {
        z.set_column(j, &phog(f, cfg)?);
    }
    Ok(z)
}
