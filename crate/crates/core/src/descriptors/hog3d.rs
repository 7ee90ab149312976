use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use super::cuboid::Volume;
use super::gradient::{cell_of, diff};
use crate::error::{Error, Result};

const PHI: f64 = 1.618_033_988_749_895;

/// Orientation quantisers. Opposite directions share an axis ("folded").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientationAxes {
    /// 10 axes through the face centres of an icosahedron.
    Icosahedral,
    /// 6 axes through the face centres of a dodecahedron.
    Dodecahedral,
    Custom(Vec<[f64; 3]>),
}

impl OrientationAxes {
    pub fn vectors(&self) -> Vec<Vector3<f64>> {
        let raw: Vec<[f64; 3]> = match self {
            OrientationAxes::Icosahedral => {
                let ip = 1.0 / PHI;
                vec![
                    [1.0, 1.0, 1.0],
                    [1.0, 1.0, -1.0],
                    [1.0, -1.0, 1.0],
                    [1.0, -1.0, -1.0],
                    [0.0, ip, PHI],
                    [0.0, ip, -PHI],
                    [ip, PHI, 0.0],
                    [ip, -PHI, 0.0],
                    [PHI, 0.0, ip],
                    [PHI, 0.0, -ip],
                ]
            }
            OrientationAxes::Dodecahedral => vec![
                [0.0, 1.0, PHI],
                [0.0, 1.0, -PHI],
                [1.0, PHI, 0.0],
                [1.0, -PHI, 0.0],
                [PHI, 0.0, 1.0],
                [PHI, 0.0, -1.0],
            ],
            OrientationAxes::Custom(v) => v.clone(),
        };
        raw.into_iter()
            .map(|a| Vector3::from(a).normalize())
            .collect()
    }

    pub fn len(&self) -> usize {
        match self {
            OrientationAxes::Icosahedral => 10,
            OrientationAxes::Dodecahedral => 6,
            OrientationAxes::Custom(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Spatio-temporal gradient histogram over a cell grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hog3dConfig {
    /// Cells along (x, y, t).
    pub cell_grid: [usize; 3],
    pub axes: OrientationAxes,
    /// Per-voxel magnitude cap; 0 disables clipping.
    pub clip: f64,
}

impl Default for Hog3dConfig {
    fn default() -> Self {
        Self {
            cell_grid: [5, 2, 3],
            axes: OrientationAxes::Icosahedral,
            clip: 0.0,
        }
    }
}

impl Hog3dConfig {
    /// Descriptor dimension: axes × cells.
    pub fn dim(&self) -> usize {
        self.axes.len() * self.cell_grid.iter().product::<usize>()
    }

    pub fn validate(&self) -> Result<()> {
        if self.cell_grid.contains(&0) {
            return Err(Error::invalid("HOG3D cell grid entries must be positive"));
        }
        if self.axes.is_empty() {
            return Err(Error::invalid("HOG3D needs at least one orientation axis"));
        }
        if let OrientationAxes::Custom(v) = &self.axes {
            if v.iter().any(|a| !(Vector3::from(*a).norm() > 0.0)) {
                return Err(Error::invalid("HOG3D custom axes must be non-zero"));
            }
        }
        if !(self.clip >= 0.0) {
            return Err(Error::invalid("HOG3D clip must be >= 0"));
        }
        Ok(())
    }
}

/// HOG3D descriptor of a cuboid, unnormalised.
///
/// Every voxel's gradient magnitude goes to the axis with the largest
/// absolute cosine (lowest index on ties) in the cell containing the voxel.
/// Layout: cells in (t, y, x) order, axes innermost. Dimensions that do not
/// divide evenly are split proportionally.
pub fn hog3d(cuboid: &Volume, cfg: &Hog3dConfig) -> Result<DVector<f64>> {
    cfg.validate()?;
    let (w, h, d) = cuboid.dims();
    if d < 2 {
        return Err(Error::invalid("HOG3D needs at least 2 frames for a temporal gradient"));
    }
    if w == 0 || h == 0 {
        return Err(Error::invalid("empty cuboid"));
    }
    let axes = cfg.axes.vectors();
    let n_axes = axes.len();
    let [cx, cy, ct] = cfg.cell_grid;
    let mut out = DVector::zeros(cfg.dim());

    for t in 0..d {
        let ci_t = cell_of(t, d, ct);
        for y in 0..h {
            let ci_y = cell_of(y, h, cy);
            for x in 0..w {
                let g = Vector3::new(
                    diff(x, w, |i| cuboid.get(i, y, t)),
                    diff(y, h, |j| cuboid.get(x, j, t)),
                    diff(t, d, |k| cuboid.get(x, y, k)),
                );
                let mut m = g.norm();
                if m == 0.0 {
                    continue;
                }
                let mut best = 0;
                let mut best_cos = -1.0;
                for (a, axis) in axes.iter().enumerate() {
                    let c = axis.dot(&g).abs();
                    if c > best_cos {
                        best_cos = c;
                        best = a;
                    }
                }
                if cfg.clip > 0.0 {
                    m = m.min(cfg.clip);
                }
                let cell = (ci_t * cy + ci_y) * cx + cell_of(x, w, cx);
                out[cell * n_axes + best] += m;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_dimension_is_300() {
        assert_eq!(Hog3dConfig::default().dim(), 300);
    }

    #[test]
    fn axes_are_distinct_unit_vectors() {
        for set in [OrientationAxes::Icosahedral, OrientationAxes::Dodecahedral] {
            let v = set.vectors();
            assert_eq!(v.len(), set.len());
            for (i, a) in v.iter().enumerate() {
                assert!((a.norm() - 1.0).abs() < 1e-12);
                for b in &v[i + 1..] {
                    assert!(a.dot(b).abs() < 0.99);
                }
            }
        }
    }

    #[test]
    fn constant_volume_is_zero() {
        let vol = Volume::filled(12, 12, 7, 0.5);
        let v = hog3d(&vol, &Hog3dConfig::default()).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_frame_rejected() {
        assert!(hog3d(&Volume::filled(4, 4, 1, 0.0), &Hog3dConfig::default()).is_err());
    }
}
