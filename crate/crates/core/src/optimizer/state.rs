use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::FeatureMap;
use crate::types::PointLabelSet;

/// Superpixel centers `S_i = [T_i, X_i]`, stored flat, one row of
/// `embedding_dim` values per center.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperpixelState {
    count: usize,
    feature_dim: usize,
    centers: Vec<f64>,
}

impl SuperpixelState {
    pub fn new(count: usize, feature_dim: usize, centers: Vec<f64>) -> Self {
        assert_eq!(
            centers.len(),
            count * (feature_dim + 2),
            "center buffer size"
        );
        Self {
            count,
            feature_dim,
            centers,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn embedding_dim(&self) -> usize {
        self.feature_dim + 2
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn centers_mut(&mut self) -> &mut [f64] {
        &mut self.centers
    }

    pub fn center(&self, i: usize) -> &[f64] {
        let e = self.embedding_dim();
        &self.centers[i * e..(i + 1) * e]
    }

    /// Feature part `T_i`.
    pub fn center_feature(&self, i: usize) -> &[f64] {
        &self.center(i)[..self.feature_dim]
    }

    /// Coordinate part `X_i`.
    pub fn center_coord(&self, i: usize) -> [f64; 2] {
        let c = self.center(i);
        [c[self.feature_dim], c[self.feature_dim + 1]]
    }

    pub fn is_finite(&self) -> bool {
        self.centers.iter().all(|x| x.is_finite())
    }
}

/// Grid-seeded centers: `X_i` is the middle of grid cell `(r, c)` and `T_i`
/// the mean feature of the pixels whose scaled coordinates fall in that cell.
///
/// A cell that contains no pixel (grids finer than the image) takes the
/// feature of the pixel nearest its middle.
pub fn init_centers(fm: &FeatureMap) -> SuperpixelState {
    let grid = fm
        .grid()
        .expect("coordinates must be attached before seeding");
    let (d, k) = (fm.dim(), grid.count());
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for p in 0..fm.len() {
        let [x_row, x_col] = fm.coord(p);
        let r = (x_row.floor() as usize).min(grid.rows - 1);
        let c = (x_col.floor() as usize).min(grid.cols - 1);
        let cell = r * grid.cols + c;
        counts[cell] += 1;
        for (s, v) in sums[cell * d..(cell + 1) * d].iter_mut().zip(fm.feature(p)) {
            *s += v;
        }
    }
    let mut centers = Vec::with_capacity(k * (d + 2));
    for r in 0..grid.rows {
        for c in 0..grid.cols {
            let cell = r * grid.cols + c;
            if counts[cell] > 0 {
                let n = counts[cell] as f64;
                centers.extend(sums[cell * d..(cell + 1) * d].iter().map(|s| s / n));
            } else {
                let row = (((r as f64 + 0.5) * fm.height() as f64 / grid.rows as f64) as usize)
                    .min(fm.height() - 1);
                let col = (((c as f64 + 0.5) * fm.width() as f64 / grid.cols as f64) as usize)
                    .min(fm.width() - 1);
                centers.extend_from_slice(fm.feature(row * fm.width() + col));
            }
            centers.push(r as f64 + 0.5);
            centers.push(c as f64 + 0.5);
        }
    }
    SuperpixelState::new(k, d, centers)
}

/// Pixels entering the two loss terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSet {
    /// Distinct pixels for the distortion term, ascending.
    pub distortion_pixels: Vec<usize>,
    /// Every labeled pixel, in label order.
    pub label_pixels: Vec<usize>,
}

impl SampleSet {
    /// Draws `n_sample` distinct pixels (clamped to the image size) without
    /// replacement from a generator seeded with `seed`.
    pub fn draw(n_pixels: usize, n_sample: usize, seed: u64, labels: &PointLabelSet) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::draw_with(&mut rng, n_pixels, n_sample, labels)
    }

    pub(crate) fn draw_with(
        rng: &mut ChaCha8Rng,
        n_pixels: usize,
        n_sample: usize,
        labels: &PointLabelSet,
    ) -> Self {
        let amount = n_sample.min(n_pixels);
        let mut distortion_pixels = rand::seq::index::sample(rng, n_pixels, amount).into_vec();
        distortion_pixels.sort_unstable();
        Self {
            distortion_pixels,
            label_pixels: labels.pixel_indices(),
        }
    }
}
