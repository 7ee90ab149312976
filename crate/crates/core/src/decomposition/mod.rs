//! Key-frame selection by reconstruction contribution and expansion into
//! `K` temporally ordered key-sequences.

mod keyseq;
mod selection;

pub use keyseq::{KeySequence, KeySequenceSet};
pub use selection::{
    anchors, candidate_set, extract_keysequences, frame_contribution_scores, select_keyframes,
    ContributionScores, ScoreMode, SelectionConfig, Theta,
};
pub use crate::video::VideoTensor;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::descriptors::{
    keysequence_descriptors, phog_matrix, CuboidConfig, Hog3dConfig, PhogConfig,
};
use crate::error::{Error, Result};
use crate::seed;
use crate::sparse_solvers::{solve_joint_row_sparse, AdmmConfig};

/// Resampling attempts when every cuboid of a window is filtered out.
const RESAMPLE_ATTEMPTS: u64 = 5;

/// Everything `decompose` needs besides the data.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DecompositionConfig {
    pub phog: PhogConfig,
    pub selection: SelectionConfig,
    pub admm: AdmmConfig,
    pub cuboids: CuboidConfig,
    pub hog3d: Hog3dConfig,
}

/// Key-frame indices of `video` chosen by joint row-sparse reconstruction
/// against `class_frames` (PHOG columns of the other videos of the reference
/// class, possibly none).
pub fn proposed_keyframes(
    video: &VideoTensor,
    z_self: &DMatrix<f64>,
    class_frames: &DMatrix<f64>,
    cfg: &DecompositionConfig,
) -> Result<Vec<usize>> {
    if z_self.ncols() != video.len() {
        return Err(Error::invalid(format!(
            "{} descriptor columns for {} frames",
            z_self.ncols(),
            video.len()
        )));
    }
    let rest = if class_frames.ncols() == 0 {
        DMatrix::zeros(z_self.nrows(), 0)
    } else {
        class_frames.clone()
    };
    let sol = solve_joint_row_sparse(z_self, &rest, &cfg.admm)?;
    let scores = frame_contribution_scores(&sol.w_full(), cfg.selection.score_mode);
    select_keyframes(&scores, &cfg.selection, video.len())
}

/// Full decomposition of one video: PHOG per frame, joint row-sparse
/// reconstruction, scoring, key-frame selection, windows, cuboid descriptors.
pub fn decompose(
    video: &VideoTensor,
    class_frames: &DMatrix<f64>,
    cfg: &DecompositionConfig,
    reference_class: Option<usize>,
    seed: u64,
) -> Result<KeySequenceSet> {
    let z_self = phog_matrix(video.frames(), &cfg.phog)?;
    let indices = proposed_keyframes(video, &z_self, class_frames, cfg)?;
    describe_keyframes(video, &indices, cfg, reference_class, seed)
}

/// Build a key-sequence set from already chosen key-frames.
///
/// Cuboid placements are drawn once per video and shared by its `K`
/// windows.
pub fn describe_keyframes(
    video: &VideoTensor,
    indices: &[usize],
    cfg: &DecompositionConfig,
    reference_class: Option<usize>,
    seed: u64,
) -> Result<KeySequenceSet> {
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("key-frame indices must be strictly increasing"));
    }
    let t = cfg.selection.t;
    let windows = extract_keysequences(video, indices, t)?;
    let mut sequences = Vec::with_capacity(windows.len());
    for (&center, frames) in indices.iter().zip(windows) {
        let descs = describe_window(&frames, cfg, seed)?;
        sequences.push(KeySequence {
            key_frame_index: center,
            frames,
            cuboid_descriptors: descs,
        });
    }
    Ok(KeySequenceSet {
        sequences,
        t,
        source_video: video.id.clone(),
        reference_class,
    })
}

fn describe_window(
    frames: &[crate::video::Frame],
    cfg: &DecompositionConfig,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let mut last = None;
    for attempt in 0..RESAMPLE_ATTEMPTS {
        let s = seed::derive(seed, &[seed::STAGE_CUBOIDS, attempt]);
        match keysequence_descriptors(frames, &cfg.cuboids, &cfg.hog3d, s) {
            Err(e @ Error::EmptyResult(_)) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}
