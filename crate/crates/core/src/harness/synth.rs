//! Synthetic action videos.
//!
//! Each class is one motion archetype played in three acts (early, middle,
//! late) with a class-specific speed profile. Videos vary in start state,
//! overall speed, act boundaries and shape size, and carry additive
//! Gaussian pixel noise.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, LabeledVideo, Split};
use crate::error::{Error, Result};
use crate::seed;
use crate::video::{Frame, VideoTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    BarRight,
    BarDown,
    ExpandingBlob,
    RotatingBar,
    BouncingDot,
    FlickerGrid,
}

impl Archetype {
    pub const ALL: [Archetype; 6] = [
        Archetype::BarRight,
        Archetype::BarDown,
        Archetype::ExpandingBlob,
        Archetype::RotatingBar,
        Archetype::BouncingDot,
        Archetype::FlickerGrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Archetype::BarRight => "bar_right",
            Archetype::BarDown => "bar_down",
            Archetype::ExpandingBlob => "expanding_blob",
            Archetype::RotatingBar => "rotating_bar",
            Archetype::BouncingDot => "bouncing_dot",
            Archetype::FlickerGrid => "flicker_grid",
        }
    }

    /// Per-act speed (units per frame, archetype specific).
    fn act_speeds(self) -> [f64; 3] {
        match self {
            Archetype::BarRight => [1.5, 0.0, -1.5],
            Archetype::BarDown => [0.0, 1.5, 3.0],
            Archetype::ExpandingBlob => [0.6, 0.0, -0.6],
            Archetype::RotatingBar => [0.12, -0.12, 0.25],
            Archetype::BouncingDot => [1.5, 3.0, 0.0],
            Archetype::FlickerGrid => [1.0, 0.0, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub classes: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub noise_sigma: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: 3,
            train_per_class: 10,
            test_per_class: 5,
            frames: 24,
            width: 32,
            height: 32,
            noise_sigma: 0.05,
        }
    }
}

/// Per-video random draw.
struct Params {
    start: f64,
    start2: f64,
    speed: f64,
    size: f64,
    cuts: [f64; 2],
}

/// Generate a labelled train/test dataset; deterministic in `seed`.
pub fn synth_gen(cfg: &SynthConfig, seed: u64) -> Result<Dataset> {
    if cfg.classes == 0 || cfg.classes > Archetype::ALL.len() {
        return Err(Error::invalid(format!(
            "{} classes requested, {} archetypes available",
            cfg.classes,
            Archetype::ALL.len()
        )));
    }
    if cfg.frames < 3 || cfg.width < 8 || cfg.height < 8 {
        return Err(Error::invalid("synthetic videos need >= 3 frames of at least 8x8"));
    }
    if !(cfg.noise_sigma >= 0.0) || cfg.train_per_class == 0 {
        return Err(Error::invalid("noise must be >= 0 and each class needs training videos"));
    }
    let noise = Normal::new(0.0, cfg.noise_sigma).expect("sigma validated");
    // class ids follow name order, videos follow on-disk order, so writing
    // the dataset out and ingesting it again gives back the same value
    let mut chosen: Vec<(usize, Archetype)> = Archetype::ALL[..cfg.classes].iter().copied().enumerate().collect();
    chosen.sort_by_key(|(_, a)| a.name());
    let classes = chosen.iter().map(|(_, a)| a.name().to_string()).collect();
    let mut videos = Vec::new();
    for (split, count) in [(Split::Train, cfg.train_per_class), (Split::Test, cfg.test_per_class)] {
        for (class_id, &(arch_idx, arch)) in chosen.iter().enumerate() {
            for i in 0..count {
                let s = seed::derive(seed, &[seed::STAGE_SYNTH, arch_idx as u64, split as u64, i as u64]);
                let mut rng = seed::rng(s);
                let name = format!("v{i:03}");
                let id = format!("{}/{}/{name}", split.dir_name(), arch.name());
                let frames = render(arch, cfg, &mut rng, &noise);
                videos.push(LabeledVideo {
                    video: VideoTensor::new(id, frames, Some(class_id))?,
                    class_id,
                    split,
                    name,
                });
            }
        }
    }
    Ok(Dataset { classes, videos })
}

fn draw_params(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Params {
    let n = cfg.frames as f64;
    Params {
        start: rng.random_range(0.0..1.0),
        start2: rng.random_range(0.0..1.0),
        speed: rng.random_range(0.8..1.2),
        size: rng.random_range(0.0..1.0),
        cuts: [
            n / 3.0 + rng.random_range(-1.0..1.0),
            2.0 * n / 3.0 + rng.random_range(-1.0..1.0),
        ],
    }
}

/// Integrated displacement after `f` frames under the act speed profile.
fn progress(f: f64, speeds: [f64; 3], p: &Params) -> f64 {
    let [c1, c2] = p.cuts;
    let a = f.min(c1);
    let b = (f.min(c2) - c1).max(0.0);
    let c = (f - c2).max(0.0);
    p.speed * (speeds[0] * a + speeds[1] * b + speeds[2] * c)
}

/// Anti-aliased coverage from a signed distance (negative inside).
fn coverage(sd: f64) -> f64 {
    (0.5 - sd).clamp(0.0, 1.0)
}

fn render(arch: Archetype, cfg: &SynthConfig, rng: &mut ChaCha8Rng, noise: &Normal<f64>) -> Vec<Frame> {
    let p = draw_params(cfg, rng);
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let speeds = arch.act_speeds();
    let mut frames = Vec::with_capacity(cfg.frames);
    for f in 0..cfg.frames {
        let d = progress(f as f64, speeds, &p);
        let intensity = |x: f64, y: f64| -> f64 {
            match arch {
                Archetype::BarRight => {
                    let half = 1.5 + p.size;
                    let cx = (p.start * w + d).rem_euclid(w);
                    let dx = (x - cx).abs().min(w - (x - cx).abs());
                    coverage(dx - half)
                }
                Archetype::BarDown => {
                    let half = 1.5 + p.size;
                    let cy = (p.start * h + d).rem_euclid(h);
                    let dy = (y - cy).abs().min(h - (y - cy).abs());
                    coverage(dy - half)
                }
                Archetype::ExpandingBlob => {
                    let cx = w / 2.0 + (p.start - 0.5) * 6.0;
                    let cy = h / 2.0 + (p.start2 - 0.5) * 6.0;
                    let r = (4.0 + 2.0 * p.size + d).clamp(2.0, w.min(h) / 2.0 - 1.0);
                    coverage((x - cx).hypot(y - cy) - r)
                }
                Archetype::RotatingBar => {
                    let theta = p.start * PI + d;
                    let (s, c) = theta.sin_cos();
                    let (dx, dy) = (x - w / 2.0, y - h / 2.0);
                    let across = (-s * dx + c * dy).abs();
                    let along = (c * dx + s * dy).abs();
                    coverage((across - (1.0 + p.size)).max(along - w * 0.4))
                }
                Archetype::BouncingDot => {
                    let half = 2.5 + p.size;
                    let span_x = w - 2.0 * half;
                    let span_y = h - 2.0 * half;
                    let fold = |v: f64, span: f64| {
                        let m = v.rem_euclid(2.0 * span);
                        if m > span { 2.0 * span - m } else { m }
                    };
                    let cx = half + fold(p.start * span_x + d, span_x);
                    let cy = half + fold(p.start2 * span_y + 0.7 * d, span_y);
                    coverage((x - cx).abs().max((y - cy).abs()) - half)
                }
                Archetype::FlickerGrid => {
                    let period = 8.0;
                    let on = ((x / period).floor() + (y / period).floor()) as i64 % 2 == 0;
                    // phase advances with d; brightness follows a square wave
                    let phase = (p.start * 2.0 + d).rem_euclid(2.0);
                    let bright = if phase < 1.0 { 1.0 } else { 0.2 };
                    if on { bright } else { 0.0 }
                }
            }
        };
        let pixels = (0..cfg.height)
            .flat_map(|y| (0..cfg.width).map(move |x| (x, y)))
            .map(|(x, y)| {
                let v = intensity(x as f64 + 0.5, y as f64 + 0.5);
                let n = if cfg.noise_sigma > 0.0 { noise.sample(rng) } else { 0.0 };
                (v + n) as f32
            })
            .collect();
        frames.push(Frame::new(cfg.width, cfg.height, pixels).expect("sized by construction"));
    }
    frames
}
