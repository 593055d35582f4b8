//! Seeded synthetic scenes with known dense truth, and point-label sampling
//! from a dense mask.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::types::{ImageData, PointLabelSet, SegmentationMask, UNKNOWN};

#[derive(Clone, Debug)]
pub struct Scene {
    pub image: ImageData,
    pub truth: SegmentationMask,
    pub num_classes: usize,
}

/// Class colors used by the generated scenes.
pub const SCENE_COLORS: [[u8; 3]; 6] = [
    [194, 178, 128], // sand
    [214, 92, 116],  // pink coral
    [60, 120, 70],   // algae
    [70, 90, 160],   // blue coral
    [150, 140, 130], // rubble
    [230, 160, 60],  // orange sponge
];

fn jitter(rng: &mut ChaCha8Rng, base: [u8; 3], noise: i32) -> [u8; 3] {
    if noise == 0 {
        return base;
    }
    base.map(|c| (c as i32 + rng.gen_range(-noise..=noise)).clamp(0, 255) as u8)
}

/// Two color regions split by a wavy, roughly vertical boundary. Pixel noise
/// of up to `noise` levels per channel is added.
pub fn two_region_scene(height: usize, width: usize, noise: i32, seed: u64) -> Result<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut classes = Vec::with_capacity(height * width);
    let mut pixels = Vec::with_capacity(height * width);
    for row in 0..height {
        let r = row as f64 / height as f64;
        let edge = width as f64
            * (0.5 + 0.12 * (r * 9.0 + phase).sin() + 0.05 * (r * 23.0 + 2.0 * phase).sin());
        for col in 0..width {
            let class = u8::from(col as f64 + 0.5 >= edge);
            classes.push(class);
            pixels.push(jitter(&mut rng, SCENE_COLORS[class as usize], noise));
        }
    }
    Ok(Scene {
        image: ImageData::new(height, width, pixels)?,
        truth: SegmentationMask::new(height, width, classes)?,
        num_classes: 2,
    })
}

/// Blobby multi-class scene: each pixel takes the class of the nearest of
/// `n_seeds` random sites, with a sinusoidal warp so borders are irregular.
pub fn blob_scene(
    height: usize,
    width: usize,
    num_classes: usize,
    n_seeds: usize,
    noise: i32,
    seed: u64,
) -> Result<Scene> {
    let num_classes = num_classes.clamp(1, SCENE_COLORS.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sites: Vec<(f64, f64, u8)> = (0..n_seeds.max(1))
        .map(|i| {
            (
                rng.gen_range(0.0..height as f64),
                rng.gen_range(0.0..width as f64),
                (i % num_classes) as u8,
            )
        })
        .collect();
    let amp = 0.04 * height.min(width) as f64;
    let mut classes = Vec::with_capacity(height * width);
    let mut pixels = Vec::with_capacity(height * width);
    for row in 0..height {
        for col in 0..width {
            let y = row as f64 + amp * (col as f64 * 0.11).sin();
            let x = col as f64 + amp * (row as f64 * 0.13).cos();
            let class = sites
                .iter()
                .min_by(|a, b| {
                    let da = (a.0 - y).powi(2) + (a.1 - x).powi(2);
                    let db = (b.0 - y).powi(2) + (b.1 - x).powi(2);
                    da.total_cmp(&db)
                })
                .map(|s| s.2)
                .expect("at least one site");
            classes.push(class);
            pixels.push(jitter(&mut rng, SCENE_COLORS[class as usize], noise));
        }
    }
    Ok(Scene {
        image: ImageData::new(height, width, pixels)?,
        truth: SegmentationMask::new(height, width, classes)?,
        num_classes,
    })
}

/// Draws `count` labeled positions uniformly without replacement from the
/// non-UNKNOWN pixels of `truth`.
pub fn sample_labels(
    truth: &SegmentationMask,
    num_classes: usize,
    count: usize,
    seed: u64,
) -> Result<PointLabelSet> {
    let candidates: Vec<usize> = (0..truth.classes().len())
        .filter(|&p| truth.classes()[p] != UNKNOWN)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amount = count.min(candidates.len());
    let mut picked: Vec<usize> = index::sample(&mut rng, candidates.len(), amount)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    picked.sort_unstable();
    to_label_set(truth, num_classes, &picked)
}

/// Draws `per_class` positions of every class present in `truth`.
pub fn sample_labels_per_class(
    truth: &SegmentationMask,
    num_classes: usize,
    per_class: usize,
    seed: u64,
) -> Result<PointLabelSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::new();
    for class in 0..num_classes as u8 {
        let members: Vec<usize> = (0..truth.classes().len())
            .filter(|&p| truth.classes()[p] == class)
            .collect();
        let amount = per_class.min(members.len());
        picked.extend(
            index::sample(&mut rng, members.len(), amount)
                .into_iter()
                .map(|i| members[i]),
        );
    }
    picked.sort_unstable();
    to_label_set(truth, num_classes, &picked)
}

fn to_label_set(
    truth: &SegmentationMask,
    num_classes: usize,
    pixels: &[usize],
) -> Result<PointLabelSet> {
    let w = truth.width();
    let entries = pixels
        .iter()
        .map(|&p| (p / w, p % w, truth.classes()[p] as u32));
    Ok(PointLabelSet::new(truth.height(), w, num_classes, entries)?.0)
}
