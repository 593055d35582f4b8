use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Settings for one center-optimization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// Gaussian width for feature distances.
    pub sigma_t: f64,
    /// Gaussian width for scaled-coordinate distances.
    pub sigma_x: f64,
    /// Weight of the conflict term.
    pub lambda: f64,
    pub n_superpixels: usize,
    /// Pixels drawn for the distortion term (clamped to the image size).
    pub n_sample_pixels: usize,
    pub learning_rate: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Redraw the distortion sample before every step instead of once.
    #[serde(default)]
    pub resample_each_iteration: bool,
}

impl HyperParams {
    pub const DEFAULT_SIGMA_T: f64 = 0.5534;
    pub const DEFAULT_SIGMA_X: f64 = 0.631;
    pub const DEFAULT_LAMBDA: f64 = 1140.0;
    pub const DEFAULT_SUPERPIXELS: usize = 100;
    pub const DEFAULT_SAMPLE_PIXELS: usize = 3000;
    pub const DEFAULT_LEARNING_RATE: f64 = 0.01;
    pub const DEFAULT_ITERATIONS: usize = 100;

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("sigma_t", self.sigma_t)?;
        positive("sigma_x", self.sigma_x)?;
        positive("learning_rate", self.learning_rate)?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "lambda must be non-negative and finite, got {}",
                self.lambda
            )));
        }
        if self.n_superpixels == 0 {
            return Err(Error::Config("n_superpixels must be at least 1".into()));
        }
        if self.n_sample_pixels == 0 {
            return Err(Error::Config("n_sample_pixels must be at least 1".into()));
        }
        Ok(())
    }

    /// The three ensemble members' `(sigma_t, sigma_x, lambda)` triples from
    /// the standard configuration, each with a distinct seed offset.
    pub fn standard_ensemble(base: &HyperParams) -> [HyperParams; 3] {
        const TRIPLES: [(f64, f64, f64); 3] = [
            (0.5539, 0.5597, 1500.0),
            (0.846, 0.5309, 1590.0),
            (0.553, 0.631, 1140.0),
        ];
        std::array::from_fn(|i| {
            let (sigma_t, sigma_x, lambda) = TRIPLES[i];
            HyperParams {
                sigma_t,
                sigma_x,
                lambda,
                seed: base.seed.wrapping_add(i as u64),
                ..base.clone()
            }
        })
    }
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            sigma_t: Self::DEFAULT_SIGMA_T,
            sigma_x: Self::DEFAULT_SIGMA_X,
            lambda: Self::DEFAULT_LAMBDA,
            n_superpixels: Self::DEFAULT_SUPERPIXELS,
            n_sample_pixels: Self::DEFAULT_SAMPLE_PIXELS,
            learning_rate: Self::DEFAULT_LEARNING_RATE,
            iterations: Self::DEFAULT_ITERATIONS,
            seed: 0,
            resample_each_iteration: false,
        }
    }
}
