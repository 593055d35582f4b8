//! One image, end to end: features, superpixels, propagated mask.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baseline::{slic_segment, SlicParams};
use crate::error::Result;
use crate::features::{
    balanced_lab, lab_texture_features, normalize_features, prepare_embedding, FeatureMap,
};
use crate::optimizer::{hard_assign, optimize, HyperParams, LossParts};
use crate::plsf::load_feature_file;
use crate::propagation::{propagate, superpixel_label_vote, PropagationMode};
use crate::types::{ImageData, PointLabelSet, SegmentationMask, SuperpixelMap};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "path", rename_all = "snake_case")]
pub enum FeatureSource {
    /// Balanced per-pixel LAB, `D = 3`.
    Lab,
    /// LAB plus 3x3 local mean and deviation, `D = 9`.
    LabTexture,
    /// Precomputed features in a PLSF file.
    File(PathBuf),
}

impl FeatureSource {
    /// Raw (unnormalized) features for `image`.
    pub fn extract(&self, image: &ImageData) -> Result<FeatureMap> {
        match self {
            FeatureSource::Lab => Ok(balanced_lab(image)),
            FeatureSource::LabTexture => Ok(lab_texture_features(image)),
            FeatureSource::File(path) => {
                load_feature_file(path, Some((image.height(), image.width())))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Label-aware center optimization.
    Ours,
    Slic(SlicParams),
}

/// Wall-clock seconds per stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub features: f64,
    pub optimize: f64,
    pub propagate: f64,
}

impl StageTimings {
    pub fn total(&self) -> f64 {
        self.features + self.optimize + self.propagate
    }
}

#[derive(Clone, Debug)]
pub struct SegmentOutcome {
    pub mask: SegmentationMask,
    pub assignment: SuperpixelMap,
    /// Empty for the SLIC baseline.
    pub loss_trace: Vec<LossParts>,
    pub effective_superpixels: usize,
    pub sample_size: usize,
    pub timings: StageTimings,
}

impl SegmentOutcome {
    pub fn final_loss(&self) -> Option<LossParts> {
        self.loss_trace.last().copied()
    }
}

/// Mean feature of the pixels in each superpixel.
pub fn superpixel_mean_features(fm: &FeatureMap, map: &SuperpixelMap) -> Vec<Vec<f64>> {
    let d = fm.dim();
    let mut sums = vec![vec![0.0; d]; map.count()];
    let mut counts = vec![0usize; map.count()];
    for (p, &l) in map.labels().iter().enumerate() {
        counts[l as usize] += 1;
        for (s, v) in sums[l as usize].iter_mut().zip(fm.feature(p)) {
            *s += v;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        if n > 0 {
            s.iter_mut().for_each(|x| *x /= n as f64);
        }
    }
    sums
}

pub fn segment(
    image: &ImageData,
    labels: &PointLabelSet,
    source: &FeatureSource,
    method: &Method,
    hp: &HyperParams,
    mode: PropagationMode,
) -> Result<SegmentOutcome> {
    mode.validate(labels.num_classes())?;
    let mut timings = StageTimings::default();

    match method {
        Method::Ours => {
            hp.validate()?;
            let t = Instant::now();
            let fm = prepare_embedding(source.extract(image)?, hp.n_superpixels)?;
            timings.features = t.elapsed().as_secs_f64();

            let t = Instant::now();
            let run = optimize(&fm, labels, hp)?;
            let assignment = hard_assign(&fm, &run.state, hp);
            timings.optimize = t.elapsed().as_secs_f64();

            let t = Instant::now();
            let votes = superpixel_label_vote(&assignment, labels);
            let centers: Vec<Vec<f64>> = (0..run.state.count())
                .map(|i| run.state.center_feature(i).to_vec())
                .collect();
            let mask = propagate(&assignment, &votes, &centers, mode)?;
            timings.propagate = t.elapsed().as_secs_f64();

            Ok(SegmentOutcome {
                mask,
                effective_superpixels: assignment.count(),
                assignment,
                sample_size: run.sample_size,
                loss_trace: run.trace,
                timings,
            })
        }
        Method::Slic(params) => {
            let t = Instant::now();
            let fm = normalize_features(source.extract(image)?)?;
            timings.features = t.elapsed().as_secs_f64();

            let t = Instant::now();
            let assignment = slic_segment(image, params.k, params.compactness, params.iterations);
            timings.optimize = t.elapsed().as_secs_f64();

            let t = Instant::now();
            let votes = superpixel_label_vote(&assignment, labels);
            let centers = superpixel_mean_features(&fm, &assignment);
            let mask = propagate(&assignment, &votes, &centers, mode)?;
            timings.propagate = t.elapsed().as_secs_f64();

            Ok(SegmentOutcome {
                mask,
                effective_superpixels: assignment.count(),
                assignment,
                sample_size: 0,
                loss_trace: Vec::new(),
                timings,
            })
        }
    }
}
