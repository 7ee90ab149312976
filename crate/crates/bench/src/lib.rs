//! Seeded inputs shared by the benchmarks.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use itra_core::descriptors::Volume;
use itra_core::video::Frame;

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

pub fn textured_frame(width: usize, height: usize) -> Frame {
    Frame::from_fn(width, height, |x, y| {
        let (x, y) = (x as f32, y as f32);
        0.5 + 0.25 * (0.3 * x).sin() + 0.25 * (0.2 * y + 0.1 * x).cos()
    })
}

pub fn drifting_volume(width: usize, height: usize, depth: usize) -> Volume {
    Volume::from_fn(width, height, depth, |x, y, t| {
        let (x, y, t) = (x as f64, y as f64, t as f64);
        ((0.4 * (x - t)).sin() * (0.3 * y).cos() + 1.0) * 0.5
    })
}
