use rand::Rng;
use serde::{Deserialize, Serialize};

use super::filter::{FilterThreshold, Norm};
use crate::error::{Error, Result};
use crate::seed;
use crate::video::Frame;

/// Dense intensity volume indexed `(x, y, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    width: usize,
    height: usize,
    depth: usize,
    data: Vec<f64>,
}

impl Volume {
    pub fn new(width: usize, height: usize, depth: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * depth {
            return Err(Error::invalid("volume data length does not match its dimensions"));
        }
        Ok(Self {
            width,
            height,
            depth,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, depth: usize, value: f64) -> Self {
        Self {
            width,
            height,
            depth,
            data: vec![value; width * height * depth],
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        depth: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * depth);
        for t in 0..depth {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(x, y, t));
                }
            }
        }
        Self {
            width,
            height,
            depth,
            data,
        }
    }

    /// Stack equally sized frames along time.
    pub fn from_frames(frames: &[Frame]) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::invalid("cannot build a volume from zero frames"))?;
        if frames.iter().any(|f| !f.same_shape(first)) {
            return Err(Error::invalid("frames of a volume must share one shape"));
        }
        let data = frames
            .iter()
            .flat_map(|f| f.pixels().iter().map(|&p| p as f64))
            .collect();
        Ok(Self {
            width: first.width(),
            height: first.height(),
            depth: frames.len(),
            data,
        })
    }

    /// (width, height, depth)
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.depth)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, t: usize) -> f64 {
        self.data[(t * self.height + y) * self.width + x]
    }

    pub fn crop(&self, spec: &CuboidSpec) -> Result<Volume> {
        if !spec.fits(self.dims()) {
            return Err(Error::invalid(format!("cuboid {spec:?} exceeds volume {:?}", self.dims())));
        }
        Ok(Volume::from_fn(spec.width, spec.height, spec.depth, |x, y, t| {
            self.get(spec.x + x, spec.y + y, spec.t0 + t)
        }))
    }
}

/// Placement of a cuboid inside a key-sequence volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CuboidSpec {
    pub x: usize,
    pub y: usize,
    pub t0: usize,
    pub width: usize,
    pub height: usize,
    pub depth: usize,
}

impl CuboidSpec {
    pub fn fits(&self, (w, h, d): (usize, usize, usize)) -> bool {
        self.width > 0
            && self.height > 0
            && self.depth > 0
            && self.x + self.width <= w
            && self.y + self.height <= h
            && self.t0 + self.depth <= d
    }
}

/// Cuboid sampling and filtering parameters for one key-sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CuboidConfig {
    pub count: usize,
    pub width: usize,
    pub height: usize,
    pub depth: usize,
    pub threshold: FilterThreshold,
    pub norm: Norm,
}

impl Default for CuboidConfig {
    fn default() -> Self {
        Self {
            count: 300,
            width: 12,
            height: 12,
            depth: 7,
            threshold: FilterThreshold::DropFraction(0.05),
            norm: Norm::L2,
        }
    }
}

impl CuboidConfig {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.depth)
    }
}

/// Draw `count` uniformly placed, in-bounds cuboids of size `dims`
/// (width, height, depth) inside a volume of size `volume`.
pub fn sample_cuboids(
    volume: (usize, usize, usize),
    count: usize,
    dims: (usize, usize, usize),
    seed: u64,
) -> Result<Vec<CuboidSpec>> {
    let (vw, vh, vd) = volume;
    let (w, h, d) = dims;
    if count == 0 {
        return Err(Error::invalid("cuboid count must be positive"));
    }
    if w == 0 || h == 0 || d == 0 || w > vw || h > vh || d > vd {
        return Err(Error::invalid(format!(
            "cuboid {w}x{h}x{d} does not fit in volume {vw}x{vh}x{vd}"
        )));
    }
    let mut rng = seed::rng(seed);
    Ok((0..count)
        .map(|_| CuboidSpec {
            x: rng.random_range(0..=vw - w),
            y: rng.random_range(0..=vh - h),
            t0: rng.random_range(0..=vd - d),
            width: w,
            height: h,
            depth: d,
        })
        .collect())
}
