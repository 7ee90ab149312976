use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::projection::{l12_norm, project_l12_ball_mut};
use crate::error::{Error, Result};

/// Ridge added to `Z_i^T Z_i` so duplicate frames never make the system singular.
pub const RIDGE: f64 = 1e-8;

/// Parameters of the joint row-sparse reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmmConfig {
    /// Weight of the cross-reconstruction term.
    pub alpha: f64,
    /// ℓ1,2 budget shared by both coefficient blocks.
    pub lambda_budget: f64,
    /// Separate budget for the cross block; falls back to `lambda_budget`.
    pub lambda_rest: Option<f64>,
    /// Initial penalty, adapted by residual balancing.
    pub rho: f64,
    pub max_iters: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            lambda_budget: 4.0,
            lambda_rest: None,
            rho: 1.0,
            max_iters: 500,
            primal_tol: 1e-5,
            dual_tol: 1e-5,
        }
    }
}

impl AdmmConfig {
    pub fn with_budget(alpha: f64, lambda: f64) -> Self {
        Self {
            alpha,
            lambda_budget: lambda,
            ..Self::default()
        }
    }

    pub fn rest_budget(&self) -> f64 {
        self.lambda_rest.unwrap_or(self.lambda_budget)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !positive(self.lambda_budget) || !positive(self.rest_budget()) {
            return Err(Error::invalid("l12 budgets must be positive"));
        }
        if !positive(self.rho) || !positive(self.primal_tol) || !positive(self.dual_tol) {
            return Err(Error::invalid("rho and tolerances must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be positive"));
        }
        Ok(())
    }
}

/// Coefficients `[W_i | W_(-i)]` of the constrained reconstruction.
#[derive(Debug, Clone)]
pub struct RowSparseSolution {
    /// `n_i x n_i` self-reconstruction block.
    pub w_self: DMatrix<f64>,
    /// `n_i x (n - n_i)` cross-reconstruction block.
    pub w_rest: DMatrix<f64>,
    /// Objective of the feasible iterate after every iteration.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl RowSparseSolution {
    /// Row-aligned concatenation `[w_self | w_rest]`.
    pub fn w_full(&self) -> DMatrix<f64> {
        let n_i = self.w_self.nrows();
        let mut w = DMatrix::zeros(n_i, self.w_self.ncols() + self.w_rest.ncols());
        w.columns_mut(0, self.w_self.ncols()).copy_from(&self.w_self);
        w.columns_mut(self.w_self.ncols(), self.w_rest.ncols())
            .copy_from(&self.w_rest);
        w
    }

    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// `||Z_i - Z_i W_i||_F^2 + alpha ||Z_(-i) - Z_i W_(-i)||_F^2`.
pub fn joint_objective(
    z_self: &DMatrix<f64>,
    z_rest: &DMatrix<f64>,
    w_self: &DMatrix<f64>,
    w_rest: &DMatrix<f64>,
    alpha: f64,
) -> f64 {
    let own = (z_self - z_self * w_self).norm_squared();
    let cross = if z_rest.ncols() == 0 {
        0.0
    } else {
        (z_rest - z_self * w_rest).norm_squared()
    };
    own + alpha * cross
}

/// Solve the joint row-sparse reconstruction by ADMM.
///
/// The splitting is `W = V` with `V` constrained to the product of the two
/// ℓ1,2 balls. The `W` update is a ridge-regularised least-squares solve done
/// in the eigenbasis of `Z_i^T Z_i`, so the penalty can be rebalanced without
/// refactoring. The returned coefficients are the best feasible iterate seen,
/// starting from zero.
pub fn solve_joint_row_sparse(
    z_self: &DMatrix<f64>,
    z_rest: &DMatrix<f64>,
    cfg: &AdmmConfig,
) -> Result<RowSparseSolution> {
    cfg.validate()?;
    let (m, n_i) = z_self.shape();
    if m == 0 || n_i == 0 {
        return Err(Error::invalid("z_self must be non-empty"));
    }
    if z_rest.ncols() > 0 && z_rest.nrows() != m {
        return Err(Error::invalid(format!(
            "z_rest has {} rows, z_self has {m}",
            z_rest.nrows()
        )));
    }
    if z_self.iter().chain(z_rest.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("frame descriptors contain non-finite entries"));
    }
    let n_rest = z_rest.ncols();
    let n = n_i + n_rest;
    let alpha = cfg.alpha;
    let (budget_self, budget_rest) = (cfg.lambda_budget, cfg.rest_budget());

    let mut gram = z_self.tr_mul(z_self);
    for i in 0..n_i {
        gram[(i, i)] += RIDGE;
    }
    let eig = SymmetricEigen::new(gram.clone());
    let q = eig.eigenvectors;
    let spectrum = eig.eigenvalues;

    // constant part of the W-update right-hand side: [2G | 2 alpha Z_i^T Z_rest]
    let mut rhs_const = DMatrix::zeros(n_i, n);
    rhs_const.columns_mut(0, n_i).copy_from(&(&gram * 2.0));
    if n_rest > 0 {
        rhs_const
            .columns_mut(n_i, n_rest)
            .copy_from(&(z_self.tr_mul(z_rest) * (2.0 * alpha)));
    }
    let weight = |col: usize| if col < n_i { 1.0 } else { alpha };

    let objective = |v: &DMatrix<f64>| {
        let ws = v.columns(0, n_i).into_owned();
        let wr = v.columns(n_i, n_rest).into_owned();
        joint_objective(z_self, z_rest, &ws, &wr, alpha)
    };

    let mut v = DMatrix::<f64>::zeros(n_i, n);
    let mut u = DMatrix::<f64>::zeros(n_i, n);
    let mut rho = cfg.rho;
    let mut best = v.clone();
    let mut best_obj = objective(&v);
    let mut trace = Vec::with_capacity(cfg.max_iters);
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iters {
        iterations += 1;
        // W-update
        let rhs = &rhs_const + (&v - &u) * rho;
        let mut t = q.tr_mul(&rhs);
        for col in 0..n {
            let c = 2.0 * weight(col);
            for k in 0..n_i {
                t[(k, col)] /= c * spectrum[k] + rho;
            }
        }
        let w = &q * t;

        // V-update: blockwise projection
        let v_old = std::mem::replace(&mut v, &w + &u);
        project_l12_ball_mut(v.columns_mut(0, n_i), budget_self);
        if n_rest > 0 {
            project_l12_ball_mut(v.columns_mut(n_i, n_rest), budget_rest);
        }

        u += &w - &v;

        let obj = objective(&v);
        trace.push(obj);
        if obj < best_obj {
            best_obj = obj;
            best.copy_from(&v);
        }

        let primal = (&w - &v).norm();
        let dual = rho * (&v - &v_old).norm();
        let primal_scale = w.norm().max(v.norm()).max(1.0);
        let dual_scale = (rho * u.norm()).max(1.0);
        if primal <= cfg.primal_tol * primal_scale && dual <= cfg.dual_tol * dual_scale {
            converged = true;
            break;
        }

        if primal > 10.0 * dual {
            rho *= 2.0;
            u /= 2.0;
        } else if dual > 10.0 * primal {
            rho /= 2.0;
            u *= 2.0;
        }
    }

    // keep the trace ending on the value actually returned
    if trace.last().is_some_and(|&last| last != best_obj) {
        trace.push(best_obj);
    }
    if trace.is_empty() {
        trace.push(best_obj);
    }

    Ok(RowSparseSolution {
        w_self: best.columns(0, n_i).into_owned(),
        w_rest: best.columns(n_i, n_rest).into_owned(),
        objective_trace: trace,
        converged,
        iterations,
    })
}

/// True when both blocks satisfy their budgets within relative slack `slack`.
pub fn is_feasible(sol: &RowSparseSolution, cfg: &AdmmConfig, slack: f64) -> bool {
    l12_norm(&sol.w_self) <= cfg.lambda_budget * (1.0 + slack)
        && l12_norm(&sol.w_rest) <= cfg.rest_budget() * (1.0 + slack)
}
