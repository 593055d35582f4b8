//! Gradient-descent refinement of superpixel centers under the combined
//! distortion + conflict loss, and the final hard assignment.

mod loss;
mod params;
mod state;

pub use loss::{
    compute_memberships, compute_potentials, conflict_loss, distortion_loss, loss_and_gradient,
    loss_gradient, memberships, total_loss, LossParts, MembershipMatrix,
};
pub use params::HyperParams;
pub use state::{init_centers, SampleSet, SuperpixelState};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::types::{PointLabelSet, SuperpixelMap};

#[derive(Clone, Debug)]
pub struct Optimized {
    pub state: SuperpixelState,
    /// Loss before each step, then after the last one (`iterations + 1` entries).
    pub trace: Vec<LossParts>,
    /// Distortion sample size actually used.
    pub sample_size: usize,
}

impl Optimized {
    pub fn final_loss(&self) -> LossParts {
        *self.trace.last().expect("trace is never empty")
    }
}

/// Seeds centers on the grid, draws the distortion sample from `hp.seed` and
/// runs `hp.iterations` fixed-step gradient descent updates.
pub fn optimize(fm: &FeatureMap, labels: &PointLabelSet, hp: &HyperParams) -> Result<Optimized> {
    hp.validate()?;
    if labels.height() != fm.height() || labels.width() != fm.width() {
        return Err(Error::DimensionMismatch(format!(
            "labels are for a {}x{} image, features are {}x{}",
            labels.height(),
            labels.width(),
            fm.height(),
            fm.width()
        )));
    }
    let mut state = init_centers(fm);
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut sample = SampleSet::draw_with(&mut rng, fm.len(), hp.n_sample_pixels, labels);
    let mut trace = Vec::with_capacity(hp.iterations + 1);

    for iteration in 0..hp.iterations {
        if iteration > 0 && hp.resample_each_iteration {
            sample = SampleSet::draw_with(&mut rng, fm.len(), hp.n_sample_pixels, labels);
        }
        let (parts, grad) = loss_and_gradient(fm, &state, &sample, labels, hp)?;
        if !parts.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss { iteration });
        }
        trace.push(parts);
        for (s, g) in state.centers_mut().iter_mut().zip(&grad) {
            *s -= hp.learning_rate * g;
        }
    }
    let last = total_loss(fm, &state, &sample, labels, hp)?;
    if !last.total.is_finite() || !state.is_finite() {
        return Err(Error::NonFiniteLoss {
            iteration: hp.iterations,
        });
    }
    trace.push(last);
    Ok(Optimized {
        state,
        trace,
        sample_size: sample.distortion_pixels.len(),
    })
}

/// Assigns every pixel to the center with the largest potential (equivalently
/// the largest membership); ties go to the lowest index.
pub fn hard_assign(fm: &FeatureMap, state: &SuperpixelState, hp: &HyperParams) -> SuperpixelMap {
    assert_eq!(
        fm.dim(),
        state.feature_dim(),
        "feature dimension of map and centers differ"
    );
    let k = state.count();
    let inv_t = 0.5 / (hp.sigma_t * hp.sigma_t);
    let inv_x = 0.5 / (hp.sigma_x * hp.sigma_x);
    let labels = (0..fm.len())
        .map(|p| {
            let f = fm.feature(p);
            let x = fm.coord(p);
            let mut best = (0u32, f64::NEG_INFINITY);
            for i in 0..k {
                let dt: f64 = f
                    .iter()
                    .zip(state.center_feature(i))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let c = state.center_coord(i);
                let dx = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                let score = -(dt * inv_t + dx * inv_x);
                if score > best.1 {
                    best = (i as u32, score);
                }
            }
            best.0
        })
        .collect();
    SuperpixelMap::new(fm.height(), fm.width(), k, labels).expect("indices below center count")
}
