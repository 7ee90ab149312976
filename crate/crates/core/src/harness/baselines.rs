//! Key-frame baselines: uniform segment centres and window k-means.

use nalgebra::{DMatrix, DVectorView};
use rand::Rng;

use crate::decomposition::anchors;
use crate::descriptors::{phog_matrix, PhogConfig};
use crate::error::{Error, Result};
use crate::seed;
use crate::video::VideoTensor;

/// Central frame of each of `k` equal segments of an `n`-frame video.
pub fn baseline_uniform_keyframes(n: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 || n < k {
        return Err(Error::invalid(format!("cannot pick {k} key-frames from {n} frames")));
    }
    Ok(anchors(n, k))
}

/// Lloyd iterations result.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    /// One centre per column.
    pub centers: DMatrix<f64>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
}

fn sq_dist(a: DVectorView<f64>, b: DVectorView<f64>) -> f64 {
    (a - b).norm_squared()
}

fn nearest(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.ncols() {
        let d = sq_dist(points.column(i), centers.column(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means++ seeding followed by at most `iters` Lloyd steps.
///
/// Points are columns. A cluster that loses all its points is re-seeded at
/// the point farthest from its current centre.
pub fn kmeans(points: &DMatrix<f64>, k: usize, iters: usize, seed: u64) -> Result<KMeans> {
    let n = points.ncols();
    if k == 0 || n < k {
        return Err(Error::invalid(format!("cannot form {k} clusters from {n} points")));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite point coordinates"));
    }
    let mut rng = seed::rng(seed);
    let mut centers = DMatrix::zeros(points.nrows(), k);
    centers.set_column(0, &points.column(rng.random_range(0..n)));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points.column(i), centers.column(0))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random_range(0.0..total);
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if r < d {
                    pick = i;
                    break;
                }
                r -= d;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.set_column(c, &points.column(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.column(i), centers.column(c)));
        }
    }

    let mut assignments = vec![usize::MAX; n];
    for _ in 0..iters {
        let mut changed = false;
        for (i, a) in assignments.iter_mut().enumerate() {
            let (c, _) = nearest(points, i, &centers);
            changed |= *a != c;
            *a = c;
        }
        let mut sums = DMatrix::zeros(points.nrows(), k);
        let mut counts = vec![0usize; k];
        for (i, &a) in assignments.iter().enumerate() {
            let mut col = sums.column_mut(a);
            col += points.column(i);
            counts[a] += 1;
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .map(|i| (i, sq_dist(points.column(i), centers.column(c))))
                    .fold((0, -1.0), |b, x| if x.1 > b.1 { x } else { b });
                centers.set_column(c, &points.column(far.0));
                changed = true;
            } else {
                centers.set_column(c, &(sums.column(c) / counts[c] as f64));
            }
        }
        if !changed {
            break;
        }
    }
    let mut inertia = 0.0;
    for (i, a) in assignments.iter_mut().enumerate() {
        let (c, d) = nearest(points, i, &centers);
        *a = c;
        inertia += d;
    }
    Ok(KMeans {
        centers,
        assignments,
        inertia,
    })
}

/// Concatenated PHOG of every `2t+1` window, one column per window centre
/// `t..n-t`.
pub fn window_embeddings(video: &VideoTensor, t: usize, phog: &PhogConfig) -> Result<DMatrix<f64>> {
    let n = video.len();
    if n < 2 * t + 1 {
        return Err(Error::invalid(format!(
            "video '{}' has {n} frames, windows need {}",
            video.id,
            2 * t + 1
        )));
    }
    let z = phog_matrix(video.frames(), phog)?;
    let d = z.nrows();
    let windows = n - 2 * t;
    let mut out = DMatrix::zeros(d * (2 * t + 1), windows);
    for w in 0..windows {
        for f in 0..2 * t + 1 {
            out.view_mut((f * d, w), (d, 1)).copy_from(&z.column(w + f));
        }
    }
    Ok(out)
}

/// Cluster the windows of `videos` into `k` centres.
pub fn fit_window_centers(
    videos: &[&VideoTensor],
    k: usize,
    t: usize,
    phog: &PhogConfig,
    iters: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let embeds = videos
        .iter()
        .map(|v| window_embeddings(v, t, phog))
        .collect::<Result<Vec<_>>>()?;
    let total: usize = embeds.iter().map(|e| e.ncols()).sum();
    let rows = embeds.first().map_or(0, |e| e.nrows());
    let mut all = DMatrix::zeros(rows, total);
    let mut at = 0;
    for e in &embeds {
        all.columns_mut(at, e.ncols()).copy_from(e);
        at += e.ncols();
    }
    Ok(kmeans(&all, k, iters, seed)?.centers)
}

/// For each centre, the centre frame of the nearest window of `video`
/// (earlier window on ties; a window already taken falls through to the
/// next nearest). Sorted ascending.
pub fn keyframes_from_centers(
    video: &VideoTensor,
    centers: &DMatrix<f64>,
    t: usize,
    phog: &PhogConfig,
) -> Result<Vec<usize>> {
    let emb = window_embeddings(video, t, phog)?;
    if emb.nrows() != centers.nrows() {
        return Err(Error::invalid("window embedding and centre dimensions differ"));
    }
    let k = centers.ncols();
    if emb.ncols() < k {
        return Err(Error::invalid(format!(
            "video '{}' has {} windows for {k} centres",
            video.id,
            emb.ncols()
        )));
    }
    let mut taken = vec![false; emb.ncols()];
    let mut out = Vec::with_capacity(k);
    for c in 0..k {
        let mut order: Vec<(usize, f64)> = (0..emb.ncols())
            .map(|w| (w, sq_dist(emb.column(w), centers.column(c))))
            .collect();
        order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let w = order.iter().find(|(w, _)| !taken[*w]).expect("enough windows").0;
        taken[w] = true;
        out.push(w + t);
    }
    out.sort_unstable();
    Ok(out)
}

/// Window k-means key-frames for every video of one class.
pub fn baseline_kmeans_keyframes(
    videos: &[&VideoTensor],
    k: usize,
    t: usize,
    phog: &PhogConfig,
    iters: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    let centers = fit_window_centers(videos, k, t, phog, iters, seed)?;
    videos
        .iter()
        .map(|v| keyframes_from_centers(v, &centers, t, phog))
        .collect()
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_examples() {
        assert_eq!(baseline_uniform_keyframes(9, 3).unwrap(), vec![1, 4, 7]);
        assert_eq!(baseline_uniform_keyframes(10, 3).unwrap(), vec![1, 5, 8]);
        assert_eq!(baseline_uniform_keyframes(11, 1).unwrap(), vec![5]);
        assert!(baseline_uniform_keyframes(2, 3).is_err());
    }

    #[test]
    fn kmeans_two_blobs() {
        let pts = DMatrix::from_row_slice(1, 6, &[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        let km = kmeans(&pts, 2, 100, 3).unwrap();
        let mut c: Vec<f64> = km.centers.iter().copied().collect();
        c.sort_by(f64::total_cmp);
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 11.0).abs() < 1e-12);
        assert!((km.inertia - 4.0).abs() < 1e-12);
    }

    #[test]
    fn kmeans_identical_points() {
        let pts = DMatrix::from_element(2, 5, 1.0);
        let a = kmeans(&pts, 3, 100, 9).unwrap();
        assert_eq!(a, kmeans(&pts, 3, 100, 9).unwrap());
        assert_eq!(a.inertia, 0.0);
    }
}
