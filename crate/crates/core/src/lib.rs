//! Dense segmentation masks from sparse point labels.
//!
//! Superpixel centers live in a joint feature + coordinate embedding and are
//! refined by gradient descent on a distortion term (pixels close to their
//! fuzzy centers) plus a weighted conflict term (labeled pixels of different
//! classes should not share memberships). Each superpixel then takes the
//! majority class of the point labels it contains; unlabeled superpixels fall
//! back to the nearest labeled one in feature space, a fixed substrate class,
//! or stay unknown.
//!
//! ```no_run
//! use pointprop::{io, pipeline, HyperParams, PropagationMode};
//!
//! let image = io::load_image("quadrat.png")?;
//! let labels = io::load_point_labels("quadrat.csv", &image, 35)?.labels;
//! let out = pipeline::segment(
//!     &image,
//!     &labels,
//!     &pipeline::FeatureSource::Lab,
//!     &pipeline::Method::Ours,
//!     &HyperParams::default(),
//!     PropagationMode::NearestFeature,
//! )?;
//! io::save_mask(&out.mask, "quadrat_mask.png")?;
//! # Ok::<(), pointprop::Error>(())
//! ```

pub mod baseline;
pub mod config;
pub mod ensemble;
mod error;
pub mod features;
pub mod io;
pub mod metrics;
pub mod optimizer;
pub mod pipeline;
pub mod plsf;
pub mod propagation;
pub mod synthetic;
mod types;

pub use error::{Error, Result};
pub use features::{FeatureMap, GridShape};
pub use optimizer::{HyperParams, SuperpixelState};
pub use propagation::PropagationMode;
pub use types::{
    ImageData, Palette, PaletteEntry, PointLabel, PointLabelSet, SegmentationMask, SuperpixelMap,
    MAX_CLASSES, UNKNOWN,
};
