mod common;

use nalgebra::{DMatrix, Vector3};
use proptest::prelude::*;

use common::gradient_1d;
use itra_core::descriptors::{
    filter_and_normalize, hog3d, phog, resolve_threshold, sample_cuboids, FilterThreshold, Hog3dConfig,
    Norm, OrientationAxes, PhogConfig, Volume,
};
use itra_core::video::Frame;

#[test]
fn constant_frame_has_zero_phog() {
    let v = phog(&Frame::filled(16, 12, 0.3), &PhogConfig::default()).unwrap();
    assert_eq!(v.len(), 189);
    assert!(v.iter().all(|&x| x == 0.0));
}

#[test]
fn vertical_step_edge_fills_the_zero_orientation_bin() {
    let f = Frame::from_fn(16, 16, |x, _| if x < 7 { 0.0 } else { 1.0 });
    let cfg = PhogConfig::default();
    let v = phog(&f, &cfg).unwrap();
    // oracle: every nonzero gradient is horizontal, orientation 0, bin 0
    for y in 0..16 {
        let row: Vec<f64> = (0..16).map(|x| f.get(x, y) as f64).collect();
        for x in 0..16 {
            let col: Vec<f64> = (0..16).map(|yy| f.get(x, yy) as f64).collect();
            assert_eq!(gradient_1d(&col, y), 0.0);
            let gx = gradient_1d(&row, x);
            assert!(gx >= 0.0);
        }
    }
    let mut nonzero_cells = 0;
    for cell in v.as_slice().chunks(cfg.bins) {
        let total: f64 = cell.iter().sum();
        if total > 0.0 {
            nonzero_cells += 1;
            assert_eq!(cell[0], total);
        }
    }
    assert!(nonzero_cells >= 1 + 2 + 4);
}

#[test]
fn hog3d_ramp_along_an_axis_uses_only_that_axis() {
    for axes in [OrientationAxes::Icosahedral, OrientationAxes::Dodecahedral] {
        let vectors = axes.vectors();
        for (k, a) in vectors.iter().enumerate() {
            let vol = Volume::from_fn(12, 12, 7, |x, y, t| a.dot(&Vector3::new(x as f64, y as f64, t as f64)));
            let cfg = Hog3dConfig {
                axes: axes.clone(),
                ..Hog3dConfig::default()
            };
            let v = hog3d(&vol, &cfg).unwrap();
            let n = vectors.len();
            for (c, cell) in v.as_slice().chunks(n).enumerate() {
                for (j, &x) in cell.iter().enumerate() {
                    if j == k {
                        assert!(x > 0.0, "axis {k} cell {c} empty");
                    } else {
                        assert_eq!(x, 0.0, "axis {k} leaked into bin {j} of cell {c}");
                    }
                }
            }
        }
    }
}

#[test]
fn hog3d_dimensions() {
    assert_eq!(Hog3dConfig::default().dim(), 300);
    let desk = Hog3dConfig {
        cell_grid: [2, 1, 1],
        axes: OrientationAxes::Dodecahedral,
        ..Hog3dConfig::default()
    };
    assert_eq!(desk.dim(), 12);
    let zero = hog3d(&Volume::filled(12, 12, 7, 1.0), &Hog3dConfig::default()).unwrap();
    assert!(zero.iter().all(|&x| x == 0.0));
}

#[test]
fn default_cuboid_count() {
    let specs = sample_cuboids((32, 32, 7), 300, (12, 12, 7), 1).unwrap();
    assert_eq!(specs.len(), 300);
}

#[test]
fn different_seeds_give_different_layouts() {
    let lists: Vec<_> = (0..10)
        .map(|s| sample_cuboids((40, 30, 9), 50, (12, 12, 7), s).unwrap())
        .collect();
    for i in 0..10 {
        for j in i + 1..10 {
            assert_ne!(lists[i], lists[j]);
        }
    }
}

#[test]
fn fixed_thresholds_filter_by_norm() {
    // absolute train/test thresholds of three benchmark setups
    let table = [("kth", 2.5, 2.5), ("olympic", 2.0, 2.0), ("hoha", 1.3, 1.6)];
    let descs = DMatrix::from_fn(2, 6, |i, j| if i == 0 { j as f64 * 0.6 } else { 0.0 });
    for (_, train, test) in table {
        for t in [train, test] {
            let out = filter_and_normalize(&descs, resolve_threshold(&descs, FilterThreshold::Fixed(t)), Norm::L2).unwrap();
            let expect = (0..6).filter(|&j| j as f64 * 0.6 > t).count();
            assert_eq!(out.ncols(), expect);
        }
    }
}

#[test]
fn zero_column_dropped_at_threshold_zero() {
    let descs = DMatrix::from_column_slice(2, 3, &[3.0, 4.0, 0.0, 0.0, 1.0, 0.0]);
    let out = filter_and_normalize(&descs, 0.0, Norm::L2).unwrap();
    assert_eq!(out.ncols(), 2);
    assert!((out.column(0).norm() - 1.0).abs() < 1e-15);
}

fn exact_frame(w: usize, h: usize) -> impl Strategy<Value = Frame> {
    prop::collection::vec(0u8..64, w * h)
        .prop_map(move |v| Frame::new(w, h, v.into_iter().map(|k| k as f32 / 64.0).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn phog_ignores_brightness_offset(f in exact_frame(9, 7), shift in 0u8..64) {
        let cfg = PhogConfig::default();
        let c = shift as f32 / 64.0;
        let g = Frame::new(9, 7, f.pixels().iter().map(|p| p + c).collect()).unwrap();
        let a = phog(&f, &cfg).unwrap();
        let b = phog(&g, &cfg).unwrap();
        prop_assert!((a - b).amax() < 1e-10);
    }

    #[test]
    fn hog3d_mass_is_total_gradient_magnitude(
        data in prop::collection::vec(-1.0f64..1.0, 6 * 5 * 4),
        icosahedral in any::<bool>(),
    ) {
        let vol = Volume::new(6, 5, 4, data.clone()).unwrap();
        let cfg = Hog3dConfig {
            axes: if icosahedral { OrientationAxes::Icosahedral } else { OrientationAxes::Dodecahedral },
            cell_grid: [3, 2, 2],
            ..Hog3dConfig::default()
        };
        let v = hog3d(&vol, &cfg).unwrap();
        prop_assert!(v.iter().all(|&x| x >= 0.0));
        let at = |x: usize, y: usize, t: usize| data[(t * 5 + y) * 6 + x];
        let mut total = 0.0;
        for t in 0..4 {
            for y in 0..5 {
                for x in 0..6 {
                    let gx = gradient_1d(&(0..6).map(|i| at(i, y, t)).collect::<Vec<_>>(), x);
                    let gy = gradient_1d(&(0..5).map(|j| at(x, j, t)).collect::<Vec<_>>(), y);
                    let gt = gradient_1d(&(0..4).map(|k| at(x, y, k)).collect::<Vec<_>>(), t);
                    total += (gx * gx + gy * gy + gt * gt).sqrt();
                }
            }
        }
        let l1: f64 = v.iter().sum();
        prop_assert!((l1 - total).abs() <= 1e-6 * total.max(1e-12));
    }

    #[test]
    fn filtered_columns_are_unit_and_counted(
        cols in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 4), 1..30),
        threshold in 0.0f64..2.0,
    ) {
        let descs = DMatrix::from_fn(4, cols.len(), |i, j| cols[j][i]);
        let dropped = descs.column_iter().filter(|c| c.norm() <= threshold).count();
        match filter_and_normalize(&descs, threshold, Norm::L2) {
            Ok(out) => {
                prop_assert_eq!(out.ncols(), descs.ncols() - dropped);
                for c in out.column_iter() {
                    prop_assert!((c.norm() - 1.0).abs() < 1e-9);
                }
            }
            Err(_) => prop_assert_eq!(dropped, descs.ncols()),
        }
    }

    #[test]
    fn cuboids_stay_in_bounds(
        vw in 1usize..40, vh in 1usize..40, vd in 1usize..12,
        fw in 1usize..40, fh in 1usize..40, fd in 1usize..12,
        seed in any::<u64>(),
    ) {
        let (w, h, d) = (fw.min(vw), fh.min(vh), fd.min(vd));
        let specs = sample_cuboids((vw, vh, vd), 25, (w, h, d), seed).unwrap();
        prop_assert_eq!(specs.len(), 25);
        for s in specs {
            prop_assert!(s.fits((vw, vh, vd)));
            prop_assert!(s.x + s.width <= vw && s.y + s.height <= vh && s.t0 + s.depth <= vd);
        }
    }
}
