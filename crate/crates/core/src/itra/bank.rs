use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sparsity_for;
use crate::error::{Error, Result};
use crate::io::config_hash;
use crate::seed;
use crate::sparse_solvers::{ksvd, Dictionary, DictionaryMeta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BankConfig {
    /// Redundancy: atoms per dictionary are `mu * delta`.
    pub mu: usize,
    /// Cuboid descriptor dimension.
    pub delta: usize,
    /// Training sparsity as a fraction of the dictionary's atoms.
    pub sparsity_fraction: f64,
    pub ksvd_iters: usize,
}

impl Default for BankConfig {
    fn default() -> Self {
        Self {
            mu: 2,
            delta: 300,
            sparsity_fraction: 0.10,
            ksvd_iters: 10,
        }
    }
}

impl BankConfig {
    pub fn n_atoms(&self) -> usize {
        self.mu * self.delta
    }

    pub fn train_sparsity(&self) -> usize {
        sparsity_for(self.sparsity_fraction, self.n_atoms(), self.delta)
    }

    fn validate(&self) -> Result<()> {
        if self.mu == 0 || self.delta == 0 || self.ksvd_iters == 0 {
            return Err(Error::invalid("mu, delta and ksvd_iters must be positive"));
        }
        if !(self.sparsity_fraction > 0.0 && self.sparsity_fraction <= 1.0) {
            return Err(Error::invalid("sparsity_fraction must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Contents of `manifest.json` next to the bank's DICT files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankManifest {
    pub classes: usize,
    pub positions: usize,
    pub n_a: usize,
    pub delta: usize,
    pub config_hash: String,
    pub config: BankConfig,
}

/// The C x K grid of class/position dictionaries, plus the concatenations
/// used for projection.
#[derive(Debug, Clone)]
pub struct DictionaryBank {
    classes: usize,
    positions: usize,
    /// class-major: index `c * positions + j`
    dicts: Vec<Dictionary>,
    per_position: Vec<Dictionary>,
    /// class-major; empty when there is a single position
    other_positions: Vec<Dictionary>,
    config: BankConfig,
}

impl DictionaryBank {
    pub fn from_parts(
        classes: usize,
        positions: usize,
        dicts: Vec<Dictionary>,
        config: BankConfig,
    ) -> Result<Self> {
        if classes == 0 || positions == 0 || dicts.len() != classes * positions {
            return Err(Error::invalid(format!(
                "{} dictionaries for a {classes}x{positions} bank",
                dicts.len()
            )));
        }
        let shape = (dicts[0].dim(), dicts[0].n_atoms());
        if dicts.iter().any(|d| (d.dim(), d.n_atoms()) != shape) {
            return Err(Error::InvalidDictionary("bank dictionaries differ in shape".into()));
        }
        let per_position = (0..positions)
            .map(|j| Dictionary::concat((0..classes).map(|c| &dicts[c * positions + j])))
            .collect::<Result<Vec<_>>>()?;
        let other_positions = if positions > 1 {
            (0..classes)
                .flat_map(|c| (0..positions).map(move |j| (c, j)))
                .map(|(c, j)| {
                    Dictionary::concat(
                        (0..positions)
                            .filter(|&l| l != j)
                            .map(|l| &dicts[c * positions + l]),
                    )
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            classes,
            positions,
            dicts,
            per_position,
            other_positions,
            config,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    /// Atoms per local dictionary.
    pub fn n_atoms(&self) -> usize {
        self.dicts[0].n_atoms()
    }

    /// Descriptor dimension.
    pub fn dim(&self) -> usize {
        self.dicts[0].dim()
    }

    pub fn config(&self) -> &BankConfig {
        &self.config
    }

    pub fn get(&self, class: usize, position: usize) -> &Dictionary {
        &self.dicts[class * self.positions + position]
    }

    pub fn dictionaries(&self) -> &[Dictionary] {
        &self.dicts
    }

    /// `[D_j^1 ... D_j^C]`
    pub fn position_dictionary(&self, position: usize) -> &Dictionary {
        &self.per_position[position]
    }

    /// Class `class`'s dictionaries at every position except `position`,
    /// in position order. None when the bank has one position.
    pub fn other_positions_dictionary(&self, class: usize, position: usize) -> Option<&Dictionary> {
        self.other_positions.get(class * self.positions + position)
    }

    pub fn manifest(&self) -> BankManifest {
        BankManifest {
            classes: self.classes,
            positions: self.positions,
            n_a: self.n_atoms(),
            delta: self.dim(),
            config_hash: config_hash(&self.config),
            config: self.config.clone(),
        }
    }

    /// Write `c{c}_k{j}.dict` files and `manifest.json` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::from(e).at(dir))?;
        for c in 0..self.classes {
            for j in 0..self.positions {
                self.get(c, j).save(dir.join(format!("c{c}_k{j}.dict")))?;
            }
        }
        let manifest = serde_json::to_string_pretty(&self.manifest())?;
        let path = dir.join("manifest.json");
        fs::write(&path, manifest).map_err(|e| Error::from(e).at(path))?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::from(e).at(&path))?;
        let manifest: BankManifest =
            serde_json::from_str(&text).map_err(|e| Error::from(e).at(&path))?;
        let mut dicts = Vec::with_capacity(manifest.classes * manifest.positions);
        for c in 0..manifest.classes {
            for j in 0..manifest.positions {
                dicts.push(Dictionary::load(dir.join(format!("c{c}_k{j}.dict")))?);
            }
        }
        let bank = Self::from_parts(manifest.classes, manifest.positions, dicts, manifest.config)?;
        if bank.n_atoms() != manifest.n_a || bank.dim() != manifest.delta {
            return Err(Error::format("bank manifest", "dictionary shapes disagree with manifest").at(path));
        }
        Ok(bank)
    }
}

/// Learn one K-SVD dictionary per (class, position) cell.
///
/// `train_sets` maps `(class, position)` to the `delta x n_s` matrix of
/// cuboid descriptors from that cell; every cell of the dense C x K grid
/// must be present.
pub fn learn_dictionary_bank(
    train_sets: &BTreeMap<(usize, usize), DMatrix<f64>>,
    cfg: &BankConfig,
    seed: u64,
) -> Result<DictionaryBank> {
    cfg.validate()?;
    let classes = train_sets.keys().map(|k| k.0).max().map_or(0, |c| c + 1);
    let positions = train_sets.keys().map(|k| k.1).max().map_or(0, |j| j + 1);
    if classes == 0 || train_sets.len() != classes * positions {
        return Err(Error::invalid(format!(
            "training cells do not form a dense {classes}x{positions} grid"
        )));
    }
    let n_a = cfg.n_atoms();
    for (&(c, j), y) in train_sets {
        if y.nrows() != cfg.delta {
            return Err(Error::invalid(format!(
                "cell (class {c}, position {j}) has {}-dim descriptors, expected {}",
                y.nrows(),
                cfg.delta
            )));
        }
        if y.ncols() < n_a {
            return Err(Error::invalid(format!(
                "cell (class {c}, position {j}) has {} descriptors, needs at least {n_a}",
                y.ncols()
            )));
        }
    }
    let sparsity = cfg.train_sparsity();
    let dicts = train_sets
        .par_iter()
        .map(|(&(c, j), y)| {
            let s = seed::derive(seed, &[seed::STAGE_BANK, c as u64, j as u64]);
            let res = ksvd(y, n_a, sparsity, cfg.ksvd_iters, s)?;
            Ok(res.dictionary.with_meta(DictionaryMeta {
                class_id: Some(c as u32),
                position: Some(j as u32),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    // BTreeMap iteration is (class, position) ordered, i.e. class-major
    DictionaryBank::from_parts(classes, positions, dicts, cfg.clone())
}
