use nalgebra::{DMatrix, DVector};

use super::Dictionary;
use crate::error::{Error, Result};

/// Residual norm below which pursuit stops.
pub const RESIDUAL_STOP: f64 = 1e-12;

/// Output of a pursuit: a coefficient vector over all atoms plus its support.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    pub coefficients: DVector<f64>,
    /// Atom indices in the order they were selected.
    pub support: Vec<usize>,
    pub residual_norm: f64,
    /// Residual norm before the first pick and after every refit.
    pub residual_trace: Vec<f64>,
}

impl SparseCode {
    fn zero(n_atoms: usize, residual_norm: f64) -> Self {
        Self {
            coefficients: DVector::zeros(n_atoms),
            support: Vec::new(),
            residual_norm,
            residual_trace: vec![residual_norm],
        }
    }
}

/// Orthogonal Matching Pursuit of `y` over `dict` with at most `sparsity` atoms.
///
/// Gram columns are computed on demand; use [`OmpCoder`] when coding many
/// signals against one dictionary.
pub fn omp(dict: &Dictionary, y: &DVector<f64>, sparsity: usize) -> Result<SparseCode> {
    check_args(dict, y, sparsity)?;
    Ok(pursue(dict.atoms(), None, y, sparsity))
}

/// Batch coder that caches the dictionary Gram matrix.
#[derive(Debug, Clone)]
pub struct OmpCoder<'a> {
    dict: &'a Dictionary,
    gram: DMatrix<f64>,
}

impl<'a> OmpCoder<'a> {
    pub fn new(dict: &'a Dictionary) -> Self {
        let d = dict.atoms();
        Self {
            dict,
            gram: d.tr_mul(d),
        }
    }

    pub fn dictionary(&self) -> &Dictionary {
        self.dict
    }

    pub fn encode(&self, y: &DVector<f64>, sparsity: usize) -> Result<SparseCode> {
        check_args(self.dict, y, sparsity)?;
        Ok(pursue(self.dict.atoms(), Some(&self.gram), y, sparsity))
    }
}

fn check_args(dict: &Dictionary, y: &DVector<f64>, sparsity: usize) -> Result<()> {
    if y.len() != dict.dim() {
        return Err(Error::invalid(format!(
            "signal has dimension {}, dictionary expects {}",
            y.len(),
            dict.dim()
        )));
    }
    if sparsity == 0 || sparsity > dict.n_atoms() {
        return Err(Error::invalid(format!(
            "sparsity {sparsity} outside 1..={}",
            dict.n_atoms()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("signal contains non-finite entries"));
    }
    Ok(())
}

fn pursue(
    d: &DMatrix<f64>,
    gram: Option<&DMatrix<f64>>,
    y: &DVector<f64>,
    sparsity: usize,
) -> SparseCode {
    let n_atoms = d.ncols();
    let y_norm = y.norm();
    if y_norm < RESIDUAL_STOP {
        return SparseCode::zero(n_atoms, y_norm);
    }

    let dty = d.tr_mul(y);
    let mut corr = dty.clone();
    // Columns of the Gram matrix for the current support.
    let mut gram_cols: Vec<DVector<f64>> = Vec::with_capacity(sparsity);
    // Row-major lower Cholesky factor of the support Gram block.
    let mut chol: Vec<f64> = Vec::with_capacity(sparsity * sparsity);
    let mut support: Vec<usize> = Vec::with_capacity(sparsity);
    let mut in_support = vec![false; n_atoms];
    let mut x_s: Vec<f64> = Vec::new();
    let mut residual_norm = y_norm;
    let mut trace = vec![y_norm];
    let corr_floor = 1e-13 * y_norm;

    while support.len() < sparsity && residual_norm >= RESIDUAL_STOP {
        // lowest index wins ties
        let mut best = None;
        let mut best_abs = corr_floor;
        for (l, &c) in corr.iter().enumerate() {
            if !in_support[l] && c.abs() > best_abs {
                best_abs = c.abs();
                best = Some(l);
            }
        }
        let Some(k) = best else { break };

        let g_k: DVector<f64> = match gram {
            Some(g) => g.column(k).into_owned(),
            None => d.tr_mul(&d.column(k)),
        };

        // Extend the Cholesky factor with the new atom.
        let s = support.len();
        let mut w = vec![0.0; s];
        for i in 0..s {
            let mut acc = g_k[support[i]];
            for p in 0..i {
                acc -= chol[i * sparsity + p] * w[p];
            }
            w[i] = acc / chol[i * sparsity + i];
        }
        let diag2 = g_k[k] - w.iter().map(|v| v * v).sum::<f64>();
        if diag2 <= 1e-12 * g_k[k] {
            // numerically dependent on the current support
            break;
        }
        chol.resize((s + 1) * sparsity, 0.0);
        for (p, &wp) in w.iter().enumerate() {
            chol[s * sparsity + p] = wp;
        }
        chol[s * sparsity + s] = diag2.sqrt();
        support.push(k);
        in_support[k] = true;
        gram_cols.push(g_k);

        // Least-squares refit on the support: L L^T x = D_S^T y.
        let n = support.len();
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut acc = dty[support[i]];
            for p in 0..i {
                acc -= chol[i * sparsity + p] * z[p];
            }
            z[i] = acc / chol[i * sparsity + i];
        }
        x_s = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = z[i];
            for p in i + 1..n {
                acc -= chol[p * sparsity + i] * x_s[p];
            }
            x_s[i] = acc / chol[i * sparsity + i];
        }

        corr.copy_from(&dty);
        for (g, &x) in gram_cols.iter().zip(&x_s) {
            corr.axpy(-x, g, 1.0);
        }
        let mut r = y.clone();
        for (&idx, &x) in support.iter().zip(&x_s) {
            r.axpy(-x, &d.column(idx), 1.0);
        }
        residual_norm = r.norm();
        trace.push(residual_norm);
    }

    let mut coefficients = DVector::zeros(n_atoms);
    for (&idx, &x) in support.iter().zip(&x_s) {
        coefficients[idx] = x;
    }
    SparseCode {
        coefficients,
        support,
        residual_norm,
        residual_trace: trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn axes3() -> Dictionary {
        Dictionary::new(DMatrix::identity(3, 3)).unwrap()
    }

    #[test]
    fn exact_single_atom() {
        let d = Dictionary::from_unnormalized(dmatrix![1.0, 1.0, 0.0; 0.0, 1.0, 1.0]).unwrap();
        let y = d.atoms().column(1).into_owned();
        let code = omp(&d, &y, 1).unwrap();
        assert_eq!(code.support, vec![1]);
        assert!((code.coefficients[1] - 1.0).abs() < 1e-14);
        assert!(code.residual_norm < 1e-14);
    }

    #[test]
    fn zero_signal_stops_immediately() {
        let code = omp(&axes3(), &DVector::zeros(3), 2).unwrap();
        assert!(code.support.is_empty());
        assert_eq!(code.coefficients, DVector::zeros(3));
        assert_eq!(code.residual_norm, 0.0);
    }

    #[test]
    fn ties_pick_lowest_index() {
        let y = DVector::from_vec(vec![1.0, -1.0, 0.5]);
        let code = omp(&axes3(), &y, 1).unwrap();
        assert_eq!(code.support, vec![0]);
    }

    #[test]
    fn batch_coder_matches_single_shot() {
        let d = Dictionary::from_unnormalized(dmatrix![
            1.0, 0.3, -0.2, 0.5;
            0.1, 1.0, 0.4, -0.5;
            -0.3, 0.2, 1.0, 0.5
        ])
        .unwrap();
        let y = DVector::from_vec(vec![0.7, -1.2, 0.4]);
        let a = omp(&d, &y, 3).unwrap();
        let b = OmpCoder::new(&d).encode(&y, 3).unwrap();
        assert_eq!(a.support, b.support);
        assert!((a.coefficients - b.coefficients).norm() < 1e-12);
    }

    #[test]
    fn argument_errors() {
        let d = axes3();
        assert!(omp(&d, &DVector::zeros(2), 1).is_err());
        assert!(omp(&d, &DVector::zeros(3), 0).is_err());
        assert!(omp(&d, &DVector::zeros(3), 4).is_err());
    }

    #[test]
    fn duplicate_atoms_do_not_break_refit() {
        let d = Dictionary::from_unnormalized(dmatrix![1.0, 1.0, 0.0; 0.0, 0.0, 1.0]).unwrap();
        let y = DVector::from_vec(vec![2.0, 0.0]);
        let code = omp(&d, &y, 3).unwrap();
        assert_eq!(code.support, vec![0]);
        assert!(code.residual_norm < 1e-12);
    }
}
