use nalgebra::{DMatrix, DMatrixViewMut};

use crate::error::{Error, Result};

/// Mixed ℓ1,2 norm: the sum of the Euclidean norms of the rows.
pub fn l12_norm<S>(a: &nalgebra::Matrix<f64, nalgebra::Dyn, nalgebra::Dyn, S>) -> f64
where
    S: nalgebra::RawStorage<f64, nalgebra::Dyn, nalgebra::Dyn>,
{
    a.row_iter().map(|r| r.norm()).sum()
}

/// Euclidean projection of a nonnegative vector onto `{s >= 0, sum(s) <= budget}`.
///
/// Sort-based threshold search; vectors already inside the ball are returned
/// unchanged.
pub fn project_nonneg_l1_ball(v: &[f64], budget: f64) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total <= budget {
        return v.to_vec();
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - budget) / (j + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Project `a` onto `{X : ||X||_{1,2} <= budget}`.
///
/// Row directions are kept; only the row norms move, via an ℓ1 projection of
/// the row-norm vector.
pub fn project_l12_ball(a: &DMatrix<f64>, budget: f64) -> Result<DMatrix<f64>> {
    if !(budget > 0.0) || !budget.is_finite() {
        return Err(Error::invalid(format!("l12 budget must be positive, got {budget}")));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix contains non-finite entries"));
    }
    let mut out = a.clone();
    project_l12_ball_mut(out.as_view_mut(), budget);
    Ok(out)
}

pub(crate) fn project_l12_ball_mut(mut a: DMatrixViewMut<'_, f64>, budget: f64) {
    let norms: Vec<f64> = a.row_iter().map(|r| r.norm()).collect();
    if norms.iter().sum::<f64>() <= budget {
        return;
    }
    let shrunk = project_nonneg_l1_ball(&norms, budget);
    for (i, (&old, &new)) in norms.iter().zip(&shrunk).enumerate() {
        if old > 0.0 {
            let mut row = a.row_mut(i);
            if new > 0.0 {
                row *= new / old;
            } else {
                row.fill(0.0);
            }
        }
    }
}
