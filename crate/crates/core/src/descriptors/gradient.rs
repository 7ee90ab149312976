/// Central difference over clamped neighbours, divided by the actual index
/// span so that boundary samples use the one-sided difference.
#[inline]
pub(crate) fn diff<F: Fn(usize) -> f64>(at: usize, len: usize, sample: F) -> f64 {
    if len < 2 {
        return 0.0;
    }
    let lo = at.saturating_sub(1);
    let hi = (at + 1).min(len - 1);
    (sample(hi) - sample(lo)) / (hi - lo) as f64
}

/// Partition index of `i` when `len` samples are split into `parts` bins.
#[inline]
pub(crate) fn cell_of(i: usize, len: usize, parts: usize) -> usize {
    (i * parts / len).min(parts - 1)
}
