//! Per-pixel embeddings: a feature vector concatenated with superpixel-grid
//! coordinates.
//!
//! The usual path is `lab_features` (or `load_feature_file`) followed by
//! [`prepare_embedding`], which normalizes features to unit mean L2 norm and
//! attaches scaled coordinates for a given superpixel count.

use crate::error::{Error, Result};
use crate::types::ImageData;

/// Arrangement of superpixel seeds as a `rows x cols` grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
}

impl GridShape {
    /// Factorizes a requested superpixel count to match the image aspect ratio.
    /// The effective count `rows * cols` can exceed `k`.
    pub fn for_count(k: usize, height: usize, width: usize) -> Self {
        let k = k.max(1);
        let ideal = (k as f64 * height as f64 / width as f64).sqrt().round() as usize;
        let rows = ideal.clamp(1, k);
        let cols = k.div_ceil(rows);
        Self { rows, cols }
    }

    pub fn count(&self) -> usize {
        self.rows * self.cols
    }
}

/// Dense features `T_p` with optional scaled coordinates `X_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    height: usize,
    width: usize,
    dim: usize,
    features: Vec<f64>,
    grid: Option<GridShape>,
    coords: Vec<[f64; 2]>,
}

impl FeatureMap {
    pub fn new(height: usize, width: usize, dim: usize, features: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch(
                "feature dimension must be at least 1".into(),
            ));
        }
        if features.len() != height * width * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} feature values supplied for {height}x{width}x{dim}",
                features.len()
            )));
        }
        Ok(Self {
            height,
            width,
            dim,
            features,
            grid: None,
            coords: Vec::new(),
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Feature dimension `D` (excluding coordinates).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Full embedding dimension `D + 2`.
    pub fn embedding_dim(&self) -> usize {
        self.dim + 2
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn feature(&self, pixel: usize) -> &[f64] {
        &self.features[pixel * self.dim..(pixel + 1) * self.dim]
    }

    pub fn grid(&self) -> Option<GridShape> {
        self.grid
    }

    /// Scaled `(row, col)` coordinate. Panics if coordinates were never attached.
    pub fn coord(&self, pixel: usize) -> [f64; 2] {
        self.coords[pixel]
    }

    pub fn has_coords(&self) -> bool {
        self.grid.is_some()
    }

    /// Writes `[T_p, X_p]` into `out` (length `D + 2`).
    pub fn embedding_into(&self, pixel: usize, out: &mut [f64]) {
        out[..self.dim].copy_from_slice(self.feature(pixel));
        let c = self.coords[pixel];
        out[self.dim] = c[0];
        out[self.dim + 1] = c[1];
    }

    pub fn mean_norm(&self) -> f64 {
        let total: f64 = self
            .features
            .chunks_exact(self.dim)
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .sum();
        total / self.len() as f64
    }
}

const WHITE_X: f64 = 0.412_456_4 + 0.357_576_1 + 0.180_437_5;
const WHITE_Z: f64 = 0.019_333_9 + 0.119_192_0 + 0.950_304_1;

fn srgb_to_linear(c: u8) -> f64 {
    let c = c as f64 / 255.0;
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// CIELAB (D65 white, sRGB companding) of one sRGB pixel.
pub fn srgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let [r, g, b] = rgb.map(srgb_to_linear);
    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;
    let (fx, fy, fz) = (lab_f(x / WHITE_X), lab_f(y), lab_f(z / WHITE_Z));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Raw CIELAB values, `D = 3`, no coordinates.
pub fn rgb_to_lab(image: &ImageData) -> FeatureMap {
    let features = image
        .pixels()
        .iter()
        .flat_map(|&p| srgb_to_lab(p))
        .collect();
    FeatureMap::new(image.height(), image.width(), 3, features).expect("3 values per pixel")
}

/// LAB rescaled to `(L/100, a/128, b/128)` so no channel dominates the norm.
pub fn balanced_lab(image: &ImageData) -> FeatureMap {
    let mut fm = rgb_to_lab(image);
    for v in fm.features.chunks_exact_mut(3) {
        v[0] /= 100.0;
        v[1] /= 128.0;
        v[2] /= 128.0;
    }
    fm
}

/// Balanced LAB plus the 3x3 local mean and standard deviation of each
/// channel (`D = 9`). Borders replicate the edge pixel.
pub fn lab_texture_features(image: &ImageData) -> FeatureMap {
    let lab = balanced_lab(image);
    let (h, w) = (image.height(), image.width());
    let mut out = Vec::with_capacity(h * w * 9);
    for row in 0..h {
        for col in 0..w {
            let here = lab.feature(row * w + col);
            let mut sum = [0.0; 3];
            let mut sq = [0.0; 3];
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let r = (row as i64 + dr).clamp(0, h as i64 - 1) as usize;
                    let c = (col as i64 + dc).clamp(0, w as i64 - 1) as usize;
                    let v = lab.feature(r * w + c);
                    for k in 0..3 {
                        sum[k] += v[k];
                        sq[k] += v[k] * v[k];
                    }
                }
            }
            out.extend_from_slice(here);
            let mean = sum.map(|s| s / 9.0);
            out.extend_from_slice(&mean);
            for k in 0..3 {
                out.push((sq[k] / 9.0 - mean[k] * mean[k]).max(0.0).sqrt());
            }
        }
    }
    FeatureMap::new(h, w, 9, out).expect("9 values per pixel")
}

/// Divides every feature vector by the mean L2 norm over all pixels.
pub fn normalize_features(mut fm: FeatureMap) -> Result<FeatureMap> {
    let mean = fm.mean_norm();
    if mean.is_nan() || mean < 1e-12 {
        return Err(Error::AllZeroFeatures);
    }
    let inv = 1.0 / mean;
    fm.features.iter_mut().for_each(|x| *x *= inv);
    Ok(fm)
}

/// Attaches coordinates scaled to superpixel-grid units:
/// `X_p = (row * grid_rows / height, col * grid_cols / width)`.
pub fn scale_coordinates(mut fm: FeatureMap, n_superpixels: usize) -> FeatureMap {
    let grid = GridShape::for_count(n_superpixels, fm.height, fm.width);
    let sr = grid.rows as f64 / fm.height as f64;
    let sc = grid.cols as f64 / fm.width as f64;
    let w = fm.width;
    fm.coords = (0..fm.len())
        .map(|p| [(p / w) as f64 * sr, (p % w) as f64 * sc])
        .collect();
    fm.grid = Some(grid);
    fm
}

/// Normalizes features and attaches coordinates for `n_superpixels`.
pub fn prepare_embedding(raw: FeatureMap, n_superpixels: usize) -> Result<FeatureMap> {
    Ok(scale_coordinates(normalize_features(raw)?, n_superpixels))
}
