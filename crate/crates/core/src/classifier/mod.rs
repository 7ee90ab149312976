//! Class dictionaries over relative descriptors and classification by
//! sparse reconstruction with a majority vote over reference classes.

use std::fs;
use std::ops::Range;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{decompose, DecompositionConfig};
use crate::error::{Error, Result};
use crate::itra::{blocks_of, itra, sparsity_for, sum_pool, DictionaryBank, ItraConfig, PoolMode};
use crate::seed;
use crate::sparse_solvers::{ksvd, Dictionary, OmpCoder};
use crate::video::VideoTensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    /// Atoms per class dictionary as a multiple of the descriptor length.
    pub mu: usize,
    pub sparsity_fraction: f64,
    pub ksvd_iters: usize,
    pub pool_mode: PoolMode,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            mu: 2,
            sparsity_fraction: 0.10,
            ksvd_iters: 10,
            pool_mode: PoolMode::Signed,
        }
    }
}

/// Concatenated class dictionaries `B = [B^1 | ... | B^C]`.
#[derive(Debug, Clone)]
pub struct ClassifierModel {
    pub b: Dictionary,
    /// Column range of each class block.
    pub block_ranges: Vec<Range<usize>>,
    /// Nominal atoms per class, `mu * |descriptor|`; small classes get fewer.
    pub n_b: usize,
    /// Inference sparsity.
    pub sparsity: usize,
    pub pool_mode: PoolMode,
}

/// Contents of the model's JSON manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub class_order: Vec<String>,
    pub n_b: usize,
    pub atoms_per_class: Vec<usize>,
    pub lambda5: usize,
    pub descriptor_dim: usize,
    pub pool_mode: PoolMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub label: usize,
    /// Argmax class of each reference-class projection.
    pub partial_votes: Vec<usize>,
    /// Row v: pooled mass per class of projection v.
    pub per_class_mass: DMatrix<f64>,
}

impl ClassifierModel {
    pub fn classes(&self) -> usize {
        self.block_ranges.len()
    }

    pub fn descriptor_dim(&self) -> usize {
        self.b.dim()
    }

    /// Pooled per-class mass of the sparse code of `descriptor` over `B`.
    pub fn class_mass(&self, descriptor: &DVector<f64>) -> Result<Vec<f64>> {
        self.class_mass_with(&OmpCoder::new(&self.b), descriptor)
    }

    fn class_mass_with(&self, coder: &OmpCoder<'_>, descriptor: &DVector<f64>) -> Result<Vec<f64>> {
        let code = coder.encode(descriptor, self.sparsity.min(self.b.n_atoms()))?;
        sum_pool(&code, &self.block_ranges, self.pool_mode)
    }

    /// Classify from one descriptor per reference class.
    pub fn classify_descriptors(&self, descriptors: &[DVector<f64>]) -> Result<ClassificationResult> {
        if descriptors.is_empty() {
            return Err(Error::invalid("no descriptors to classify"));
        }
        let coder = OmpCoder::new(&self.b);
        let c = self.classes();
        let mut mass = DMatrix::zeros(descriptors.len(), c);
        let mut votes = Vec::with_capacity(descriptors.len());
        for (v, d) in descriptors.iter().enumerate() {
            let pooled = self.class_mass_with(&coder, d)?;
            votes.push(argmax_lowest(&pooled));
            for (cl, m) in pooled.into_iter().enumerate() {
                mass[(v, cl)] = m;
            }
        }
        let label = majority_vote(&votes, &mass, c);
        Ok(ClassificationResult {
            label,
            partial_votes: votes,
            per_class_mass: mass,
        })
    }

    pub fn manifest(&self, class_names: &[String]) -> ModelManifest {
        ModelManifest {
            class_order: class_names.to_vec(),
            n_b: self.n_b,
            atoms_per_class: self.block_ranges.iter().map(|r| r.len()).collect(),
            lambda5: self.sparsity,
            descriptor_dim: self.descriptor_dim(),
            pool_mode: self.pool_mode,
        }
    }

    /// Write `model.dict` and `model.json` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>, class_names: &[String]) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::from(e).at(dir))?;
        self.b.save(dir.join("model.dict"))?;
        let path = dir.join("model.json");
        fs::write(&path, serde_json::to_string_pretty(&self.manifest(class_names))?)
            .map_err(|e| Error::from(e).at(path))?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<(Self, Vec<String>)> {
        let dir = dir.as_ref();
        let path = dir.join("model.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::from(e).at(&path))?;
        let m: ModelManifest = serde_json::from_str(&text).map_err(|e| Error::from(e).at(&path))?;
        let b = Dictionary::load(dir.join("model.dict"))?;
        let block_ranges = blocks_of(m.atoms_per_class.iter().copied());
        if block_ranges.last().map(|r| r.end) != Some(b.n_atoms()) || b.dim() != m.descriptor_dim {
            return Err(Error::format("model manifest", "blocks disagree with model.dict").at(path));
        }
        Ok((
            Self {
                b,
                block_ranges,
                n_b: m.n_b,
                sparsity: m.lambda5,
                pool_mode: m.pool_mode,
            },
            m.class_order,
        ))
    }
}

/// Index of the largest value; the smallest index wins ties.
fn argmax_lowest(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Most frequent vote; ties go to the class with the larger total pooled
/// mass over all projections, then to the smaller id.
pub fn majority_vote(votes: &[usize], mass: &DMatrix<f64>, classes: usize) -> usize {
    let mut counts = vec![0usize; classes];
    for &v in votes {
        counts[v] += 1;
    }
    let top = counts.iter().copied().max().unwrap_or(0);
    let mut best: Option<(usize, f64)> = None;
    for (c, &n) in counts.iter().enumerate() {
        if n != top {
            continue;
        }
        let total = mass.column(c).sum();
        match best {
            Some((_, m)) if total <= m => {}
            _ => best = Some((c, total)),
        }
    }
    best.map_or(0, |(c, _)| c)
}

/// Learn one K-SVD dictionary per class from its training descriptors
/// (`|descriptor| x n_videos`) and concatenate them in class order.
pub fn train_classifier(
    by_class: &[DMatrix<f64>],
    cfg: &ClassifierConfig,
    seed: u64,
) -> Result<ClassifierModel> {
    if by_class.is_empty() {
        return Err(Error::invalid("no classes to train"));
    }
    if cfg.mu == 0 || cfg.ksvd_iters == 0 {
        return Err(Error::invalid("mu and ksvd_iters must be positive"));
    }
    let dim = by_class[0].nrows();
    for (c, y) in by_class.iter().enumerate() {
        if y.ncols() == 0 {
            return Err(Error::invalid(format!("class {c} has no training descriptors")));
        }
        if y.nrows() != dim {
            return Err(Error::invalid(format!(
                "class {c} descriptors have {} rows, expected {dim}",
                y.nrows()
            )));
        }
    }
    let n_b = cfg.mu * dim;
    let blocks = by_class
        .par_iter()
        .enumerate()
        .map(|(c, y)| {
            let atoms = n_b.min(y.ncols());
            let sparsity = sparsity_for(cfg.sparsity_fraction, atoms, dim);
            let s = seed::derive(seed, &[seed::STAGE_CLASSIFIER, c as u64]);
            Ok(ksvd(y, atoms, sparsity, cfg.ksvd_iters, s)?.dictionary)
        })
        .collect::<Result<Vec<_>>>()?;
    let block_ranges = blocks_of(blocks.iter().map(|d| d.n_atoms()));
    let b = Dictionary::concat(&blocks)?;
    let sparsity = sparsity_for(cfg.sparsity_fraction, b.n_atoms(), dim);
    Ok(ClassifierModel {
        b,
        block_ranges,
        n_b,
        sparsity,
        pool_mode: cfg.pool_mode,
    })
}

/// End-to-end classification of a raw test video: decompose it against
/// every class's training frames, describe each decomposition relative to
/// that class, project onto `B` and vote.
pub fn classify(
    video: &VideoTensor,
    per_class_frames: &[DMatrix<f64>],
    bank: &DictionaryBank,
    model: &ClassifierModel,
    decomposition: &DecompositionConfig,
    itra_cfg: &ItraConfig,
    seed: u64,
) -> Result<ClassificationResult> {
    if per_class_frames.len() != model.classes() || bank.classes() != model.classes() {
        return Err(Error::invalid("class counts of frames, bank and model disagree"));
    }
    let descriptors = per_class_frames
        .par_iter()
        .enumerate()
        .map(|(c, frames)| {
            let ks = decompose(video, frames, decomposition, Some(c), seed)?;
            Ok(itra(&ks, bank, c, itra_cfg)?.flat)
        })
        .collect::<Result<Vec<_>>>()?;
    model.classify_descriptors(&descriptors)
}
