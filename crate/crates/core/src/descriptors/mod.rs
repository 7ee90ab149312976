//! Low-level features: PHOG per frame, HOG3D per spatio-temporal cuboid,
//! cuboid sampling, and magnitude filtering with normalisation.

mod cuboid;
mod filter;
mod gradient;
mod hog3d;
mod phog;

pub use cuboid::{sample_cuboids, CuboidConfig, CuboidSpec, Volume};
pub use filter::{filter_and_normalize, resolve_threshold, FilterThreshold, Norm};
pub use hog3d::{hog3d, Hog3dConfig, OrientationAxes};
pub use phog::{phog, phog_matrix, PhogConfig};

use nalgebra::DMatrix;

use crate::error::Result;
use crate::video::Frame;

/// Sample, describe and filter the cuboids of one key-sequence window.
///
/// Returns the `delta x n'` matrix of normalised descriptors.
pub fn keysequence_descriptors(
    window: &[Frame],
    cuboids: &CuboidConfig,
    hog: &Hog3dConfig,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let volume = Volume::from_frames(window)?;
    let specs = sample_cuboids(volume.dims(), cuboids.count, cuboids.dims(), seed)?;
    let delta = hog.dim();
    let mut raw = DMatrix::zeros(delta, specs.len());
    for (j, spec) in specs.iter().enumerate() {
        let cube = volume.crop(spec)?;
        raw.set_column(j, &hog3d(&cube, hog)?);
    }
    let threshold = resolve_threshold(&raw, cuboids.threshold);
    filter_and_normalize(&raw, threshold, cuboids.norm)
}
