//! Class/position dictionary banks and the relative act descriptors built
//! on them: inter-class `phi` (C x K), intra-class `psi` (K x (K-1)) and
//! their concatenation.

mod bank;
mod descriptor;
mod pooling;

pub use bank::{learn_dictionary_bank, BankConfig, BankManifest, DictionaryBank};
pub use descriptor::{
    inter_descriptor, intra_descriptor, itra, itra_dim, ItraConfig, ItraDescriptor,
};
pub use pooling::{blocks_of, sum_pool, PoolMode};

/// `ceil(fraction * n_atoms)` clamped to `[1, cap]`.
///
/// A small tolerance keeps products such as `0.1 * 600` from rounding up.
pub fn sparsity_for(fraction: f64, n_atoms: usize, cap: usize) -> usize {
    let raw = (fraction * n_atoms as f64 - 1e-9).ceil();
    (raw.max(1.0) as usize).min(cap).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_percent_rule() {
        assert_eq!(sparsity_for(0.1, 600, 300), 60);
        assert_eq!(sparsity_for(0.1, 24, 12), 3);
        assert_eq!(sparsity_for(0.1, 1800, 300), 180);
        assert_eq!(sparsity_for(0.1, 4800, 300), 300);
        assert_eq!(sparsity_for(0.1, 5, 12), 1);
    }
}
