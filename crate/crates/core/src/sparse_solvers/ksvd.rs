use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::omp::OmpCoder;
use super::Dictionary;
use crate::error::{Error, Result};
use crate::seed;

/// Result of dictionary learning.
#[derive(Debug, Clone)]
pub struct KsvdResult {
    pub dictionary: Dictionary,
    /// `n_atoms x n_s` sparse codes.
    pub codes: DMatrix<f64>,
    /// Squared Frobenius reconstruction error after each iteration.
    pub error_trace: Vec<f64>,
}

impl KsvdResult {
    pub fn final_error(&self) -> f64 {
        self.error_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Learn `n_atoms` unit-norm atoms for `samples` (`m x n_s`) with K-SVD.
///
/// Each iteration codes every sample with OMP (a sample keeps its previous
/// code when that reconstructs better against the current atoms), then
/// refits every used atom and its coefficient row by a rank-1 update of the
/// restricted residual. Atoms nobody uses are swapped for the worst-fit
/// samples. The error trace is therefore non-increasing.
pub fn ksvd(
    samples: &DMatrix<f64>,
    n_atoms: usize,
    sparsity: usize,
    iters: usize,
    seed: u64,
) -> Result<KsvdResult> {
    let (m, n_s) = samples.shape();
    if n_atoms == 0 || sparsity == 0 || iters == 0 {
        return Err(Error::invalid("n_atoms, sparsity and iters must be positive"));
    }
    if n_s < n_atoms {
        return Err(Error::invalid(format!(
            "{n_s} samples cannot train {n_atoms} atoms"
        )));
    }
    if m == 0 || samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("samples must be non-empty and finite"));
    }
    let sparsity = sparsity.min(n_atoms);

    let mut atoms = initial_atoms(samples, n_atoms, seed);
    let mut codes = DMatrix::<f64>::zeros(n_atoms, n_s);
    let mut have_codes = false;
    let total_energy = samples.norm_squared();
    let mut trace = Vec::with_capacity(iters);

    for _ in 0..iters {
        code_samples(samples, &atoms, &mut codes, sparsity, have_codes)?;
        have_codes = true;

        let mut residual = samples - &atoms * &codes;
        let mut dead = Vec::new();
        for k in 0..n_atoms {
            if !update_atom(k, &mut atoms, &mut codes, &mut residual) {
                dead.push(k);
            }
        }
        if !dead.is_empty() {
            replace_dead_atoms(&dead, samples, &residual, &mut atoms);
        }

        let err = residual.norm_squared();
        trace.push(err);
        if err <= f64::EPSILON * f64::EPSILON * total_energy {
            break;
        }
    }

    Ok(KsvdResult {
        dictionary: Dictionary::new(atoms)?,
        codes,
        error_trace: trace,
    })
}

/// Normalised sample columns in seeded random order, skipping directions
/// already taken (up to sign); collinear repeats and then Gaussian vectors
/// fill any shortfall.
fn initial_atoms(samples: &DMatrix<f64>, n_atoms: usize, seed: u64) -> DMatrix<f64> {
    let (m, n_s) = samples.shape();
    let mut rng = seed::rng(seed);
    let order = index::sample(&mut rng, n_s, n_s);
    let mut atoms = DMatrix::zeros(m, n_atoms);
    let mut used = vec![false; n_s];
    let mut filled = 0;
    for distinct_only in [true, false] {
        for i in order.iter() {
            if filled == n_atoms {
                break;
            }
            let col = samples.column(i);
            let n = col.norm();
            if used[i] || !(n > 0.0) {
                continue;
            }
            let unit = col / n;
            let repeat = (0..filled).any(|k| atoms.column(k).dot(&unit).abs() > 1.0 - 1e-9);
            if distinct_only && repeat {
                continue;
            }
            used[i] = true;
            atoms.set_column(filled, &unit);
            filled += 1;
        }
    }
    // fewer non-zero samples than atoms
    while filled < n_atoms {
        let v = DVector::<f64>::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
        let n = v.norm();
        atoms.set_column(filled, &(v / n));
        filled += 1;
    }
    atoms
}

fn code_samples(
    samples: &DMatrix<f64>,
    atoms: &DMatrix<f64>,
    codes: &mut DMatrix<f64>,
    sparsity: usize,
    keep_better_old: bool,
) -> Result<()> {
    let dict = Dictionary::new(atoms.clone())?;
    let coder = OmpCoder::new(&dict);
    let new_cols: Vec<DVector<f64>> = (0..samples.ncols())
        .into_par_iter()
        .map(|i| {
            let y = samples.column(i).into_owned();
            let code = coder.encode(&y, sparsity)?;
            if keep_better_old {
                let old = codes.column(i);
                let old_err = (&y - atoms * old).norm_squared();
                if old_err <= code.residual_norm * code.residual_norm {
                    return Ok(old.into_owned());
                }
            }
            Ok(code.coefficients)
        })
        .collect::<Result<_>>()?;
    for (i, c) in new_cols.into_iter().enumerate() {
        codes.set_column(i, &c);
    }
    Ok(())
}

/// Rank-1 refit of atom `k`. Returns false if no sample uses the atom.
fn update_atom(
    k: usize,
    atoms: &mut DMatrix<f64>,
    codes: &mut DMatrix<f64>,
    residual: &mut DMatrix<f64>,
) -> bool {
    let users: Vec<usize> = (0..codes.ncols()).filter(|&i| codes[(k, i)] != 0.0).collect();
    if users.is_empty() {
        return false;
    }
    let m = atoms.nrows();
    let atom = atoms.column(k).into_owned();
    // restricted error with atom k's contribution added back
    let mut e = DMatrix::zeros(m, users.len());
    for (c, &i) in users.iter().enumerate() {
        let col = residual.column(i) + &atom * codes[(k, i)];
        e.set_column(c, &col);
    }

    let (u, x) = match leading_pair(&e) {
        Some(pair) => pair,
        None => {
            // restricted error is zero: the atom contributes nothing
            for &i in &users {
                codes[(k, i)] = 0.0;
            }
            return true;
        }
    };
    let (u, x) = if x.sum() < 0.0 { (-u, -x) } else { (u, x) };

    atoms.set_column(k, &u);
    for (c, &i) in users.iter().enumerate() {
        codes[(k, i)] = x[c];
        let col = e.column(c) - &u * x[c];
        residual.set_column(i, &col);
    }
    true
}

/// Leading left singular vector `u` and `x = u^T e` of `e`, or None if `e` is zero.
fn leading_pair(e: &DMatrix<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
    let (m, n) = e.shape();
    let u = if m <= n {
        let eig = SymmetricEigen::new(e * e.transpose());
        let top = argmax(&eig.eigenvalues)?;
        if eig.eigenvalues[top] <= 0.0 {
            return None;
        }
        eig.eigenvectors.column(top).into_owned()
    } else {
        let eig = SymmetricEigen::new(e.tr_mul(e));
        let top = argmax(&eig.eigenvalues)?;
        if eig.eigenvalues[top] <= 0.0 {
            return None;
        }
        let u = e * eig.eigenvectors.column(top);
        let n = u.norm();
        if n == 0.0 {
            return None;
        }
        u / n
    };
    let x = e.tr_mul(&u);
    Some((u, x))
}

fn argmax(v: &DVector<f64>) -> Option<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| x.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
}

fn replace_dead_atoms(
    dead: &[usize],
    samples: &DMatrix<f64>,
    residual: &DMatrix<f64>,
    atoms: &mut DMatrix<f64>,
) {
    let mut pending = residual.clone();
    let mut taken = vec![false; samples.ncols()];
    for &k in dead {
        let worst = (0..pending.ncols())
            .filter(|&i| !taken[i] && samples.column(i).norm() > 0.0)
            .map(|i| (i, pending.column(i).norm_squared()))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        let Some((i, err)) = worst else { return };
        if err <= 0.0 {
            return;
        }
        taken[i] = true;
        let col = samples.column(i);
        let atom = col / col.norm();
        // discount what the new atom will explain before the next pick
        for j in 0..pending.ncols() {
            let dot = pending.column(j).dot(&atom);
            pending.column_mut(j).axpy(-dot, &atom, 1.0);
        }
        atoms.set_column(k, &atom);
    }
}
