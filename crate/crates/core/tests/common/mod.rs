//! Reference implementations used as oracles. None of these call into the
//! solver code they check.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `m x n` matrix with orthonormal columns (`n <= m`), by Gram-Schmidt.
pub fn orthonormal(m: usize, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    loop {
        let mut q = gaussian(m, n, rng);
        let mut ok = true;
        for j in 0..n {
            for i in 0..j {
                let d = q.column(i).dot(&q.column(j));
                let qi = q.column(i).into_owned();
                let mut cj = q.column_mut(j);
                cj -= qi * d;
            }
            let norm = q.column(j).norm();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            q.column_mut(j).unscale_mut(norm);
        }
        if ok {
            return q;
        }
    }
}

/// Euclidean projection of `v` onto `{x : sum |x| <= budget}` for a
/// nonnegative `v`, by bisection on the soft threshold.
pub fn bisect_l1(v: &[f64], budget: f64) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total <= budget {
        return v.to_vec();
    }
    let (mut lo, mut hi) = (0.0, v.iter().cloned().fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s: f64 = v.iter().map(|x| (x - mid).max(0.0)).sum();
        if s > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    v.iter().map(|x| (x - hi).max(0.0)).collect()
}

/// Projection onto the l1,2 ball via bisection on row norms.
pub fn bisect_l12(a: &DMatrix<f64>, budget: f64) -> DMatrix<f64> {
    let norms: Vec<f64> = a.row_iter().map(|r| r.norm()).collect();
    let target = bisect_l1(&norms, budget);
    let mut out = a.clone();
    for (i, (&n, &t)) in norms.iter().zip(&target).enumerate() {
        let s = if n > 0.0 { t / n } else { 0.0 };
        out.row_mut(i).scale_mut(s);
    }
    out
}

pub fn l12(a: &DMatrix<f64>) -> f64 {
    a.row_iter().map(|r| r.norm()).sum()
}

pub fn objective(zs: &DMatrix<f64>, zr: &DMatrix<f64>, ws: &DMatrix<f64>, wr: &DMatrix<f64>, alpha: f64) -> f64 {
    let own = (zs - zs * ws).norm_squared();
    let cross = if zr.ncols() == 0 { 0.0 } else { (zr - zs * wr).norm_squared() };
    own + alpha * cross
}

/// Accelerated projected gradient on the joint objective with separate
/// l1,2 budgets on the two blocks.
pub fn projected_gradient(
    zs: &DMatrix<f64>,
    zr: &DMatrix<f64>,
    alpha: f64,
    lambda_self: f64,
    lambda_rest: f64,
    iters: usize,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = zs.ncols();
    let g = zs.transpose() * zs;
    let c = zs.transpose() * zr;
    let lmax = SymmetricEigen::new(g.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0, f64::max);
    let step = 1.0 / (2.0 * alpha.max(1.0) * lmax.max(1e-12));
    let mut ws = DMatrix::zeros(n, n);
    let mut wr = DMatrix::zeros(n, zr.ncols());
    let (mut ys, mut yr) = (ws.clone(), wr.clone());
    let mut t = 1.0f64;
    for _ in 0..iters {
        let gs = (&g * &ys - &g) * 2.0;
        let gr = (&g * &yr - &c) * (2.0 * alpha);
        let ns = bisect_l12(&(&ys - gs * step), lambda_self);
        let nr = if zr.ncols() == 0 {
            wr.clone()
        } else {
            bisect_l12(&(&yr - gr * step), lambda_rest)
        };
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_next;
        ys = &ns + (&ns - &ws) * mom;
        yr = &nr + (&nr - &wr) * mom;
        ws = ns;
        wr = nr;
        t = t_next;
    }
    (ws, wr)
}

/// Best support of size <= `sparsity` by exhaustive search with a
/// least-squares fit; ties go to the lexicographically first support.
pub fn brute_force_omp(d: &DMatrix<f64>, y: &DVector<f64>, sparsity: usize) -> (Vec<usize>, DVector<f64>) {
    let n = d.ncols();
    let mut best: (f64, Vec<usize>, DVector<f64>) = (y.norm_squared(), vec![], DVector::zeros(n));
    let mut supports: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..sparsity {
        let mut next = Vec::new();
        for s in &supports {
            let start = s.last().map_or(0, |&l| l + 1);
            for j in start..n {
                let mut t = s.clone();
                t.push(j);
                next.push(t);
            }
        }
        for s in &next {
            let sub = DMatrix::from_fn(d.nrows(), s.len(), |r, c| d[(r, s[c])]);
            let gram = sub.transpose() * &sub;
            let Some(chol) = gram.cholesky() else { continue };
            let coef = chol.solve(&(sub.transpose() * y));
            let res = (y - &sub * &coef).norm_squared();
            if res < best.0 - 1e-12 {
                let mut full = DVector::zeros(n);
                for (k, &j) in s.iter().enumerate() {
                    full[j] = coef[k];
                }
                best = (res, s.clone(), full);
            }
        }
        supports = next;
    }
    (best.1, best.2)
}

/// Planted single-atom model: `n_s` samples, each a random scalar times
/// one of `n_atoms` random unit atoms (every atom used).
pub fn planted_model(m: usize, n_atoms: usize, n_s: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut r = rng(seed);
    let mut atoms = gaussian(m, n_atoms, &mut r);
    for mut c in atoms.column_iter_mut() {
        let n = c.norm();
        c.unscale_mut(n);
    }
    let mut samples = DMatrix::zeros(m, n_s);
    for s in 0..n_s {
        let k = if s < n_atoms { s } else { r.random_range(0..n_atoms) };
        let mag: f64 = r.random_range(0.5..2.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
        samples.set_column(s, &(atoms.column(k) * mag));
    }
    (atoms, samples)
}

/// Greedy sign/permutation matching: for each planted atom the largest
/// remaining |cos|; returns the worst `min(|a - b|, |a + b|)`.
pub fn atom_recovery_error(planted: &DMatrix<f64>, learned: &DMatrix<f64>) -> f64 {
    let mut free: Vec<usize> = (0..learned.ncols()).collect();
    let mut worst = 0.0f64;
    for p in planted.column_iter() {
        let (pos, &j) = free
            .iter()
            .enumerate()
            .max_by(|a, b| {
                let ca = p.dot(&learned.column(*a.1)).abs();
                let cb = p.dot(&learned.column(*b.1)).abs();
                ca.total_cmp(&cb)
            })
            .expect("enough learned atoms");
        free.remove(pos);
        let l = learned.column(j);
        worst = worst.max((p - l).norm().min((p + l).norm()));
    }
    worst
}

/// Central differences on a clamped neighbourhood divided by the real span.
pub fn gradient_1d(values: &[f64], i: usize) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let lo = i.saturating_sub(1);
    let hi = (i + 1).min(n - 1);
    (values[hi] - values[lo]) / (hi - lo) as f64
}
