//! End-to-end train/test runs and the key-frame x descriptor ablation grid.

use std::collections::BTreeMap;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baselines::{baseline_uniform_keyframes, fit_window_centers, keyframes_from_centers};
use super::dataset::{Dataset, Split};
use super::eval::{evaluate, EvalReport};
use crate::classifier::{train_classifier, ClassifierConfig, ClassifierModel};
use crate::decomposition::{describe_keyframes, proposed_keyframes, DecompositionConfig, KeySequenceSet};
use crate::descriptors::{phog_matrix, OrientationAxes};
use crate::error::{Error, Result};
use crate::io::config_hash;
use crate::itra::{
    blocks_of, inter_descriptor, itra, learn_dictionary_bank, sparsity_for, sum_pool, BankConfig,
    DictionaryBank, ItraConfig, PoolMode,
};
use crate::seed;
use crate::sparse_solvers::{ksvd, Dictionary, OmpCoder};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub decomposition: DecompositionConfig,
    pub bank: BankConfig,
    pub itra: ItraConfig,
    pub classifier: ClassifierConfig,
    pub kmeans: KMeansConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansConfig {
    pub iters: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { iters: 100 }
    }
}

impl ExperimentConfig {
    /// Small setting for laptop-scale runs: 12-dim HOG3D (6 folded
    /// dodecahedral axes on a 2x1x1 grid) and `K = 3`, `t = 3`.
    pub fn desk() -> Self {
        let mut cfg = Self::default();
        cfg.decomposition.hog3d.axes = OrientationAxes::Dodecahedral;
        cfg.decomposition.hog3d.cell_grid = [2, 1, 1];
        cfg.bank.delta = cfg.decomposition.hog3d.dim();
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.decomposition.hog3d.dim();
        if dim != self.bank.delta {
            return Err(Error::invalid(format!(
                "HOG3D produces {dim}-dim descriptors but the bank expects delta = {}",
                self.bank.delta
            )));
        }
        self.decomposition.admm.validate()?;
        self.decomposition.phog.validate()?;
        Ok(())
    }

    pub fn hash(&self) -> String {
        config_hash(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyframeMethod {
    Proposed,
    Uniform,
    KMeans,
}

impl KeyframeMethod {
    pub const ALL: [KeyframeMethod; 3] = [Self::Proposed, Self::Uniform, Self::KMeans];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptorVariant {
    Itra,
    SharedDictionary,
    InterOnly,
}

impl DescriptorVariant {
    pub const ALL: [DescriptorVariant; 3] = [Self::Itra, Self::SharedDictionary, Self::InterOnly];
}

/// Seed for everything drawn while describing the video with this id.
pub fn video_seed(master: u64, video_id: &str) -> u64 {
    seed::derive(master, &[seed::STAGE_CUBOIDS, seed::label(video_id)])
}

/// Column-stack of matrices with equal row counts.
fn hstack<'a>(rows: usize, parts: impl IntoIterator<Item = &'a DMatrix<f64>>) -> DMatrix<f64> {
    let parts: Vec<_> = parts.into_iter().collect();
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        out.columns_mut(at, p.ncols()).copy_from(p);
        at += p.ncols();
    }
    out
}

/// Key-sequence sets of a whole dataset under one key-frame method.
#[derive(Debug, Clone)]
pub struct Decomposed {
    pub classes: usize,
    /// `(video index, class, set)` for every training video.
    pub train: Vec<(usize, usize, KeySequenceSet)>,
    /// `(video index, true class, one set per reference class)`.
    pub test: Vec<(usize, usize, Vec<KeySequenceSet>)>,
}

/// Per-class training frames, PHOG per video, and key-frame choice.
struct Selector<'a> {
    dataset: &'a Dataset,
    cfg: &'a ExperimentConfig,
    method: KeyframeMethod,
    phogs: Vec<DMatrix<f64>>,
    centers: Vec<DMatrix<f64>>,
}

impl<'a> Selector<'a> {
    fn new(dataset: &'a Dataset, cfg: &'a ExperimentConfig, method: KeyframeMethod, seed: u64) -> Result<Self> {
        let phog = &cfg.decomposition.phog;
        let phogs = dataset
            .videos
            .par_iter()
            .map(|v| phog_matrix(v.video.frames(), phog))
            .collect::<Result<Vec<_>>>()?;
        let centers = if method == KeyframeMethod::KMeans {
            let sel = &cfg.decomposition.selection;
            (0..dataset.num_classes())
                .into_par_iter()
                .map(|c| {
                    let vids: Vec<_> = train_of(dataset, c).map(|i| &dataset.videos[i].video).collect();
                    let s = seed::derive(seed, &[seed::STAGE_KMEANS, c as u64]);
                    fit_window_centers(&vids, sel.k, sel.t, phog, cfg.kmeans.iters, s)
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            dataset,
            cfg,
            method,
            phogs,
            centers,
        })
    }

    /// PHOG columns of class `c`'s training videos, optionally leaving one out.
    fn class_frames(&self, c: usize, exclude: Option<usize>) -> DMatrix<f64> {
        let rows = self.cfg.decomposition.phog.dim();
        hstack(
            rows,
            train_of(self.dataset, c)
                .filter(|&i| Some(i) != exclude)
                .map(|i| &self.phogs[i]),
        )
    }

    fn keyframes(&self, index: usize, reference: usize, exclude_self: bool) -> Result<Vec<usize>> {
        let video = &self.dataset.videos[index].video;
        let sel = &self.cfg.decomposition.selection;
        match self.method {
            KeyframeMethod::Proposed => {
                let frames = self.class_frames(reference, exclude_self.then_some(index));
                proposed_keyframes(video, &self.phogs[index], &frames, &self.cfg.decomposition)
            }
            KeyframeMethod::Uniform => baseline_uniform_keyframes(video.len(), sel.k),
            KeyframeMethod::KMeans => keyframes_from_centers(
                video,
                &self.centers[reference],
                sel.t,
                &self.cfg.decomposition.phog,
            ),
        }
    }

    fn describe(&self, index: usize, reference: usize, exclude_self: bool, seed: u64) -> Result<KeySequenceSet> {
        let idx = self.keyframes(index, reference, exclude_self)?;
        describe_keyframes(
            &self.dataset.videos[index].video,
            &idx,
            &self.cfg.decomposition,
            Some(reference),
            video_seed(seed, &self.dataset.videos[index].video.id),
        )
    }
}

fn train_of(dataset: &Dataset, class: usize) -> impl Iterator<Item = usize> + '_ {
    dataset
        .videos
        .iter()
        .enumerate()
        .filter(move |(_, v)| v.split == Split::Train && v.class_id == class)
        .map(|(i, _)| i)
}

/// Decompose every video: training videos against the rest of their own
/// class, test videos against every class.
pub fn decompose_dataset(
    dataset: &Dataset,
    cfg: &ExperimentConfig,
    method: KeyframeMethod,
    seed: u64,
) -> Result<Decomposed> {
    decompose_splits(dataset, cfg, method, &[Split::Train, Split::Test], seed)
}

/// As [`decompose_dataset`] restricted to `splits`; the other half of the
/// result is left empty.
pub fn decompose_splits(
    dataset: &Dataset,
    cfg: &ExperimentConfig,
    method: KeyframeMethod,
    splits: &[Split],
    seed: u64,
) -> Result<Decomposed> {
    cfg.validate()?;
    dataset.validate()?;
    let sel = Selector::new(dataset, cfg, method, seed)?;
    let classes = dataset.num_classes();
    let indexed: Vec<_> = dataset.videos.iter().enumerate().collect();
    let wanted = |split: Split| splits.contains(&split);
    let train = indexed
        .par_iter()
        .filter(|(_, v)| v.split == Split::Train && wanted(Split::Train))
        .map(|&(i, v)| Ok((i, v.class_id, sel.describe(i, v.class_id, true, seed)?)))
        .collect::<Result<Vec<_>>>()?;
    let test = indexed
        .par_iter()
        .filter(|(_, v)| v.split == Split::Test && wanted(Split::Test))
        .map(|&(i, v)| {
            let sets = (0..classes)
                .map(|c| sel.describe(i, c, false, seed))
                .collect::<Result<Vec<_>>>()?;
            Ok((i, v.class_id, sets))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Decomposed {
        classes,
        train,
        test,
    })
}

/// PHOG columns of every training video of each class.
pub fn class_training_frames(dataset: &Dataset, cfg: &ExperimentConfig) -> Result<Vec<DMatrix<f64>>> {
    let sel = Selector::new(dataset, cfg, KeyframeMethod::Uniform, 0)?;
    Ok((0..dataset.num_classes()).map(|c| sel.class_frames(c, None)).collect())
}

/// Group training cuboid descriptors by (class, position).
pub fn bank_training_sets(decomposed: &Decomposed, delta: usize) -> BTreeMap<(usize, usize), DMatrix<f64>> {
    let mut cells: BTreeMap<(usize, usize), Vec<&DMatrix<f64>>> = BTreeMap::new();
    for (_, c, ks) in &decomposed.train {
        for (j, s) in ks.sequences.iter().enumerate() {
            cells.entry((*c, j)).or_default().push(&s.cuboid_descriptors);
        }
    }
    cells
        .into_iter()
        .map(|(key, parts)| (key, hstack(delta, parts)))
        .collect()
}

/// One dictionary learned from all training cuboids regardless of class or
/// position; a key-sequence is summarised by the sum of its pooled codes.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedDictionary {
    pub dictionary: Dictionary,
    pub sparsity: usize,
    pub pool_mode: PoolMode,
}

impl SharedDictionary {
    /// One pooled scalar per position.
    pub fn describe(&self, ks: &KeySequenceSet) -> Result<DVector<f64>> {
        let coder = OmpCoder::new(&self.dictionary);
        let block: Vec<Range<usize>> = blocks_of([self.dictionary.n_atoms()]);
        let mut out = DVector::zeros(ks.k());
        for (j, s) in ks.sequences.iter().enumerate() {
            let d = &s.cuboid_descriptors;
            if d.nrows() != self.dictionary.dim() {
                return Err(Error::invalid(format!(
                    "{}-dim cuboids against a {}-dim dictionary",
                    d.nrows(),
                    self.dictionary.dim()
                )));
            }
            for i in 0..d.ncols() {
                let code = coder.encode(&d.column(i).into_owned(), self.sparsity)?;
                out[j] += sum_pool(&code, &block, self.pool_mode)?[0];
            }
        }
        Ok(out)
    }
}

/// Learn the class-shared dictionary from every training key-sequence.
pub fn ablation_shared_dictionary(
    train: &[&KeySequenceSet],
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<SharedDictionary> {
    let delta = cfg.bank.delta;
    let all = hstack(
        delta,
        train.iter().flat_map(|ks| ks.sequences.iter().map(|s| &s.cuboid_descriptors)),
    );
    let n_atoms = cfg.bank.n_atoms();
    let s = seed::derive(seed, &[seed::STAGE_SHARED_DICT]);
    let res = ksvd(&all, n_atoms, cfg.bank.train_sparsity(), cfg.bank.ksvd_iters, s)?;
    Ok(SharedDictionary {
        dictionary: res.dictionary,
        sparsity: sparsity_for(cfg.itra.sparsity_fraction, n_atoms, delta),
        pool_mode: cfg.itra.pool_mode,
    })
}

/// Inter-class block only, flattened column-major (`C * K`).
pub fn ablation_inter_only(ks: &KeySequenceSet, bank: &DictionaryBank, cfg: &ItraConfig) -> Result<DVector<f64>> {
    let phi = inter_descriptor(ks, bank, cfg.inter_sparsity(bank), cfg.pool_mode)?;
    Ok(DVector::from_column_slice(phi.as_slice()))
}

/// Descriptor extractor for one variant.
#[derive(Debug, Clone)]
pub enum Describer {
    Itra(DictionaryBank, ItraConfig),
    InterOnly(DictionaryBank, ItraConfig),
    Shared(SharedDictionary),
}

impl Describer {
    pub fn describe(&self, ks: &KeySequenceSet, reference: usize) -> Result<DVector<f64>> {
        match self {
            Describer::Itra(bank, cfg) => Ok(itra(ks, bank, reference, cfg)?.flat),
            Describer::InterOnly(bank, cfg) => ablation_inter_only(ks, bank, cfg),
            Describer::Shared(d) => d.describe(ks),
        }
    }
}

/// Learn the (class, position) bank from a decomposition.
pub fn train_bank(decomposed: &Decomposed, cfg: &ExperimentConfig, seed: u64) -> Result<DictionaryBank> {
    learn_dictionary_bank(&bank_training_sets(decomposed, cfg.bank.delta), &cfg.bank, seed)
}

/// Train-set descriptors grouped by class, one column per video.
pub fn training_descriptors(decomposed: &Decomposed, describer: &Describer) -> Result<Vec<DMatrix<f64>>> {
    let descs = decomposed
        .train
        .par_iter()
        .map(|(_, c, ks)| Ok((*c, describer.describe(ks, *c)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut by_class: Vec<Vec<DVector<f64>>> = vec![Vec::new(); decomposed.classes];
    for (c, d) in descs {
        by_class[c].push(d);
    }
    Ok(by_class
        .into_iter()
        .map(|cols| {
            if cols.is_empty() {
                DMatrix::zeros(0, 0)
            } else {
                DMatrix::from_columns(&cols)
            }
        })
        .collect())
}

/// Predicted label of every test video, in test order.
pub fn predict(decomposed: &Decomposed, describer: &Describer, model: &ClassifierModel) -> Result<Vec<usize>> {
    decomposed
        .test
        .par_iter()
        .map(|(_, _, sets)| {
            let descs = sets
                .iter()
                .enumerate()
                .map(|(c, ks)| describer.describe(ks, c))
                .collect::<Result<Vec<_>>>()?;
            Ok(model.classify_descriptors(&descs)?.label)
        })
        .collect()
}

/// Outcome of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub method: KeyframeMethod,
    pub variant: DescriptorVariant,
    pub predictions: Vec<usize>,
    pub truth: Vec<usize>,
    pub report: EvalReport,
}

/// Train and evaluate every descriptor variant in `variants` on one shared
/// decomposition.
pub fn run_variants(
    dataset: &Dataset,
    cfg: &ExperimentConfig,
    method: KeyframeMethod,
    variants: &[DescriptorVariant],
    seed: u64,
) -> Result<Vec<RunResult>> {
    let decomposed = decompose_dataset(dataset, cfg, method, seed)?;
    let needs_bank = variants.iter().any(|v| *v != DescriptorVariant::SharedDictionary);
    let bank = if needs_bank {
        Some(train_bank(&decomposed, cfg, seed)?)
    } else {
        None
    };
    let truth: Vec<usize> = decomposed.test.iter().map(|t| t.1).collect();
    let mut out = Vec::with_capacity(variants.len());
    for &variant in variants {
        let describer = match variant {
            DescriptorVariant::Itra => Describer::Itra(bank.clone().expect("bank"), cfg.itra.clone()),
            DescriptorVariant::InterOnly => Describer::InterOnly(bank.clone().expect("bank"), cfg.itra.clone()),
            DescriptorVariant::SharedDictionary => {
                let train: Vec<_> = decomposed.train.iter().map(|t| &t.2).collect();
                Describer::Shared(ablation_shared_dictionary(&train, cfg, seed)?)
            }
        };
        let by_class = training_descriptors(&decomposed, &describer)?;
        let model = train_classifier(&by_class, &cfg.classifier, seed)?;
        let predictions = predict(&decomposed, &describer, &model)?;
        let report = evaluate(&predictions, &truth, decomposed.classes, cfg.hash(), seed)?;
        out.push(RunResult {
            method,
            variant,
            predictions,
            truth: truth.clone(),
            report,
        });
    }
    Ok(out)
}

/// Full pipeline: proposed key-frames and the ITRA descriptor.
pub fn run_experiment(dataset: &Dataset, cfg: &ExperimentConfig, seed: u64) -> Result<RunResult> {
    Ok(run_variants(dataset, cfg, KeyframeMethod::Proposed, &[DescriptorVariant::Itra], seed)?
        .pop()
        .expect("one variant"))
}

/// Every key-frame method crossed with every descriptor variant.
pub fn run_ablation_grid(dataset: &Dataset, cfg: &ExperimentConfig, seed: u64) -> Result<Vec<RunResult>> {
    let mut out = Vec::new();
    for method in KeyframeMethod::ALL {
        out.extend(run_variants(dataset, cfg, method, &DescriptorVariant::ALL, seed)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_dimensions() {
        let cfg = ExperimentConfig::desk();
        assert_eq!(cfg.bank.delta, 12);
        assert_eq!(cfg.bank.n_atoms(), 24);
        cfg.validate().unwrap();
        assert!(ExperimentConfig {
            bank: BankConfig { delta: 11, ..BankConfig::default() },
            ..ExperimentConfig::desk()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn hash_tracks_config() {
        let a = ExperimentConfig::desk();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.decomposition.selection.k = 2;
        assert_ne!(a.hash(), b.hash());
    }
}
