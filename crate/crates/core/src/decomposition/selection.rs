use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video::{Frame, VideoTensor};

/// How a coefficient row is turned into a frame score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// Plain row sum.
    Signed,
    /// Sum of absolute values.
    #[default]
    Absolute,
}

/// Candidate threshold on contribution scores.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theta {
    /// Use the K-th largest score, so at least K frames qualify.
    #[default]
    Auto,
    /// Frames scoring strictly above the value; relaxed as in `Auto` when
    /// fewer than K qualify.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    /// Number of key-sequences per video.
    pub k: usize,
    /// Half-width of a key-sequence; windows hold `2t + 1` frames.
    pub t: usize,
    pub theta: Theta,
    pub score_mode: ScoreMode,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            k: 3,
            t: 3,
            theta: Theta::Auto,
            score_mode: ScoreMode::Absolute,
        }
    }
}

/// Per-frame contribution to the reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionScores(pub DVector<f64>);

impl ContributionScores {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn frame_contribution_scores(w_full: &DMatrix<f64>, mode: ScoreMode) -> ContributionScores {
    ContributionScores(DVector::from_iterator(
        w_full.nrows(),
        w_full.row_iter().map(|row| match mode {
            ScoreMode::Signed => row.sum(),
            ScoreMode::Absolute => row.iter().map(|v| v.abs()).sum(),
        }),
    ))
}

/// Frames eligible as key-frames after threshold relaxation, ascending.
pub fn candidate_set(scores: &ContributionScores, theta: Theta, k: usize) -> Vec<usize> {
    let r = &scores.0;
    let kth_largest = || {
        let mut sorted: Vec<f64> = r.iter().copied().collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        sorted[k.min(sorted.len()) - 1]
    };
    let at_least = |floor: f64| (0..r.len()).filter(|&j| r[j] >= floor).collect();
    match theta {
        Theta::Auto => at_least(kth_largest()),
        Theta::Fixed(th) => {
            let above: Vec<usize> = (0..r.len()).filter(|&j| r[j] > th).collect();
            if above.len() >= k {
                above
            } else {
                at_least(kth_largest())
            }
        }
    }
}

/// Uniform time instants `floor((k - 1/2) n / K)`, k = 1..K.
pub fn anchors(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| ((2 * i + 1) * n) / (2 * k)).collect()
}

/// Choose K key-frames: every anchor takes its nearest unused candidate
/// (earlier frame on ties); the result is sorted.
pub fn select_keyframes(
    scores: &ContributionScores,
    cfg: &SelectionConfig,
    n_i: usize,
) -> Result<Vec<usize>> {
    let k = cfg.k;
    if k == 0 {
        return Err(Error::invalid("K must be positive"));
    }
    if n_i < k {
        return Err(Error::invalid(format!("{n_i} frames cannot yield {k} key-frames")));
    }
    if scores.len() != n_i {
        return Err(Error::invalid(format!(
            "{} scores for {n_i} frames",
            scores.len()
        )));
    }
    if scores.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("contribution scores must be finite"));
    }
    let candidates = candidate_set(scores, cfg.theta, k);
    let mut used = vec![false; candidates.len()];
    let mut picked = Vec::with_capacity(k);
    for a in anchors(n_i, k) {
        let best = candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by_key(|(_, &c)| (c.abs_diff(a), c))
            .map(|(i, _)| i)
            .expect("candidate set holds at least K frames");
        used[best] = true;
        picked.push(candidates[best]);
    }
    picked.sort_unstable();
    Ok(picked)
}

/// `2t + 1`-frame windows centred on each index; positions past either end
/// repeat the boundary frame.
pub fn extract_keysequences(
    video: &VideoTensor,
    indices: &[usize],
    t: usize,
) -> Result<Vec<Vec<Frame>>> {
    let n = video.len();
    if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::invalid(format!("key-frame {bad} outside video of {n} frames")));
    }
    Ok(indices
        .iter()
        .map(|&c| {
            (0..=2 * t)
                .map(|o| {
                    let pos = (c + o).saturating_sub(t).min(n - 1);
                    video.frames()[pos].clone()
                })
                .collect()
        })
        .collect())
}
