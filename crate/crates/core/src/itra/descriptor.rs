use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pooling::{blocks_of, sum_pool, PoolMode};
use super::{sparsity_for, DictionaryBank};
use crate::decomposition::KeySequenceSet;
use crate::error::{Error, Result};
use crate::sparse_solvers::{Dictionary, OmpCoder};

/// `K * (C + K - 1)`
pub fn itra_dim(classes: usize, positions: usize) -> usize {
    positions * (classes + positions - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ItraConfig {
    /// Projection sparsity as a fraction of the concatenated dictionary's
    /// atoms, capped at the descriptor dimension.
    pub sparsity_fraction: f64,
    pub pool_mode: PoolMode,
    /// ℓ2-normalise the phi and psi blocks before concatenation.
    pub normalize_blocks: bool,
}

impl Default for ItraConfig {
    fn default() -> Self {
        Self {
            sparsity_fraction: 0.10,
            pool_mode: PoolMode::Signed,
            normalize_blocks: false,
        }
    }
}

impl ItraConfig {
    pub fn inter_sparsity(&self, bank: &DictionaryBank) -> usize {
        sparsity_for(self.sparsity_fraction, bank.classes() * bank.n_atoms(), bank.dim())
    }

    pub fn intra_sparsity(&self, bank: &DictionaryBank) -> usize {
        let atoms = (bank.positions().saturating_sub(1) * bank.n_atoms()).max(1);
        sparsity_for(self.sparsity_fraction, atoms, bank.dim())
    }
}

/// Inter- and intra-class relative descriptors of one video with respect to
/// one reference class.
#[derive(Debug, Clone, PartialEq)]
pub struct ItraDescriptor {
    /// C x K; column j pools position j's projection per class.
    pub phi: DMatrix<f64>,
    /// K x (K-1); row j pools position j's projection per other position.
    pub psi: DMatrix<f64>,
    /// `[phi^1 .. phi^K, psi^1 .. psi^K]`
    pub flat: DVector<f64>,
    pub reference_class: usize,
}

fn check_compatible(ks: &KeySequenceSet, bank: &DictionaryBank) -> Result<()> {
    if ks.k() != bank.positions() {
        return Err(Error::invalid(format!(
            "{} key-sequences for a bank with {} positions",
            ks.k(),
            bank.positions()
        )));
    }
    for (j, s) in ks.sequences.iter().enumerate() {
        let d = &s.cuboid_descriptors;
        if d.ncols() == 0 {
            return Err(Error::EmptyResult(format!(
                "key-sequence {j} of {} has no cuboid descriptors",
                ks.source_video
            )));
        }
        if d.nrows() != bank.dim() {
            return Err(Error::invalid(format!(
                "key-sequence {j} has {}-dim descriptors, bank expects {}",
                d.nrows(),
                bank.dim()
            )));
        }
    }
    Ok(())
}

/// Code every cuboid column against `dict` and add up the pooled blocks.
pub(crate) fn pooled_projection(
    descs: &DMatrix<f64>,
    dict: &Dictionary,
    blocks: &[std::ops::Range<usize>],
    sparsity: usize,
    mode: PoolMode,
) -> Result<Vec<f64>> {
    let coder = OmpCoder::new(dict);
    let sparsity = sparsity.min(dict.n_atoms());
    let pooled = (0..descs.ncols())
        .into_par_iter()
        .map(|i| {
            let code = coder.encode(&descs.column(i).into_owned(), sparsity)?;
            sum_pool(&code, blocks, mode)
        })
        .collect::<Result<Vec<_>>>()?;
    // sequential sum keeps the result independent of scheduling
    let mut total = vec![0.0; blocks.len()];
    for p in pooled {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    Ok(total)
}

/// Phi: project each key-sequence onto its position's class-concatenated
/// dictionary and pool per class.
pub fn inter_descriptor(
    ks: &KeySequenceSet,
    bank: &DictionaryBank,
    sparsity: usize,
    mode: PoolMode,
) -> Result<DMatrix<f64>> {
    check_compatible(ks, bank)?;
    let blocks = blocks_of(std::iter::repeat_n(bank.n_atoms(), bank.classes()));
    let mut phi = DMatrix::zeros(bank.classes(), bank.positions());
    for (j, s) in ks.sequences.iter().enumerate() {
        let pooled = pooled_projection(
            &s.cuboid_descriptors,
            bank.position_dictionary(j),
            &blocks,
            sparsity,
            mode,
        )?;
        phi.set_column(j, &DVector::from_vec(pooled));
    }
    Ok(phi)
}

/// Psi: project each key-sequence onto the reference class's dictionaries
/// at the other positions and pool per position.
pub fn intra_descriptor(
    ks: &KeySequenceSet,
    bank: &DictionaryBank,
    class: usize,
    sparsity: usize,
    mode: PoolMode,
) -> Result<DMatrix<f64>> {
    check_compatible(ks, bank)?;
    if class >= bank.classes() {
        return Err(Error::invalid(format!(
            "class {class} outside a bank of {} classes",
            bank.classes()
        )));
    }
    let k = bank.positions();
    let mut psi = DMatrix::zeros(k, k - 1);
    if k == 1 {
        return Ok(psi);
    }
    let blocks = blocks_of(std::iter::repeat_n(bank.n_atoms(), k - 1));
    for (j, s) in ks.sequences.iter().enumerate() {
        let dict = bank
            .other_positions_dictionary(class, j)
            .expect("bank with several positions has intra dictionaries");
        let pooled = pooled_projection(&s.cuboid_descriptors, dict, &blocks, sparsity, mode)?;
        for (l, v) in pooled.into_iter().enumerate() {
            psi[(j, l)] = v;
        }
    }
    Ok(psi)
}

/// Full descriptor of `ks` relative to `class`.
pub fn itra(
    ks: &KeySequenceSet,
    bank: &DictionaryBank,
    class: usize,
    cfg: &ItraConfig,
) -> Result<ItraDescriptor> {
    let mut phi = inter_descriptor(ks, bank, cfg.inter_sparsity(bank), cfg.pool_mode)?;
    let mut psi = intra_descriptor(ks, bank, class, cfg.intra_sparsity(bank), cfg.pool_mode)?;
    if cfg.normalize_blocks {
        for block in [&mut phi, &mut psi] {
            let n = block.norm();
            if n > 0.0 {
                *block /= n;
            }
        }
    }
    let (c, k) = (bank.classes(), bank.positions());
    let mut flat = DVector::zeros(itra_dim(c, k));
    // phi is column-major (one column per position); psi goes row by row
    flat.rows_mut(0, c * k).copy_from_slice(phi.as_slice());
    for j in 0..k {
        for l in 0..k - 1 {
            flat[c * k + j * (k - 1) + l] = psi[(j, l)];
        }
    }
    Ok(ItraDescriptor {
        phi,
        psi,
        flat,
        reference_class: class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_law() {
        assert_eq!(itra_dim(6, 3), 24);
        assert_eq!(itra_dim(16, 3), 54);
        assert_eq!(itra_dim(8, 3), 30);
        assert_eq!(itra_dim(3, 2), 8);
    }
}
