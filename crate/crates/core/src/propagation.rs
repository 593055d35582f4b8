//! Superpixel-level label propagation: majority vote inside each superpixel,
//! then a fallback rule for superpixels that contain no point label.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{PointLabelSet, SegmentationMask, SuperpixelMap, UNKNOWN};

/// How superpixels without any point label are resolved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PropagationMode {
    /// Class of the labeled superpixel with the nearest feature center.
    #[default]
    NearestFeature,
    /// A fixed class, e.g. substrate.
    SubstrateFallback { substrate_class: u8 },
    /// Leave them as [`UNKNOWN`].
    LeaveUnknown,
}

impl PropagationMode {
    pub fn validate(&self, num_classes: usize) -> Result<()> {
        if let PropagationMode::SubstrateFallback { substrate_class } = *self {
            if substrate_class as usize >= num_classes || substrate_class == UNKNOWN {
                return Err(Error::BadClass {
                    class_id: substrate_class as u32,
                    num_classes,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for PropagationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropagationMode::NearestFeature => write!(f, "nearest"),
            PropagationMode::SubstrateFallback { substrate_class } => {
                write!(f, "substrate:{substrate_class}")
            }
            PropagationMode::LeaveUnknown => write!(f, "unknown"),
        }
    }
}

impl FromStr for PropagationMode {
    type Err = Error;

    /// Accepts `nearest`, `substrate:<id>` or `unknown`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "nearest" => Ok(PropagationMode::NearestFeature),
            "unknown" => Ok(PropagationMode::LeaveUnknown),
            other => {
                let id = other
                    .strip_prefix("substrate:")
                    .and_then(|v| v.trim().parse::<u8>().ok())
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "propagation mode must be nearest, unknown or substrate:<id>, got '{other}'"
                        ))
                    })?;
                Ok(PropagationMode::SubstrateFallback {
                    substrate_class: id,
                })
            }
        }
    }
}

/// Majority class per superpixel; `None` where the superpixel holds no label.
/// Ties go to the lowest class id.
pub fn superpixel_label_vote(
    assignment: &SuperpixelMap,
    labels: &PointLabelSet,
) -> Vec<Option<u8>> {
    assert_eq!(
        (assignment.height(), assignment.width()),
        (labels.height(), labels.width()),
        "assignment and labels cover different images"
    );
    let mut tallies = vec![[0u32; 256]; assignment.count()];
    for e in labels.entries() {
        let sp = assignment.get(e.row, e.col) as usize;
        tallies[sp][e.class_id as usize] += 1;
    }
    tallies
        .iter()
        .map(|t| {
            let (class, &count) = t
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                .expect("non-empty tally");
            (count > 0).then_some(class as u8)
        })
        .collect()
}

/// Paints each superpixel with its voted class; unlabeled superpixels are
/// resolved by `mode`. `center_features` holds one feature vector per
/// superpixel and is only consulted for [`PropagationMode::NearestFeature`].
pub fn propagate(
    assignment: &SuperpixelMap,
    votes: &[Option<u8>],
    center_features: &[Vec<f64>],
    mode: PropagationMode,
) -> Result<SegmentationMask> {
    assert_eq!(votes.len(), assignment.count(), "one vote per superpixel");
    let resolved: Vec<u8> = match mode {
        PropagationMode::LeaveUnknown => votes.iter().map(|v| v.unwrap_or(UNKNOWN)).collect(),
        PropagationMode::SubstrateFallback { substrate_class } => {
            votes.iter().map(|v| v.unwrap_or(substrate_class)).collect()
        }
        PropagationMode::NearestFeature => {
            assert_eq!(
                center_features.len(),
                votes.len(),
                "one feature per superpixel"
            );
            let labeled: Vec<usize> = (0..votes.len()).filter(|&i| votes[i].is_some()).collect();
            if labeled.is_empty() {
                return Err(Error::NoLabeledSuperpixels);
            }
            votes
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v.unwrap_or_else(|| {
                        let mut best = (labeled[0], f64::INFINITY);
                        for &j in &labeled {
                            let d: f64 = center_features[i]
                                .iter()
                                .zip(&center_features[j])
                                .map(|(a, b)| (a - b) * (a - b))
                                .sum();
                            if d < best.1 {
                                best = (j, d);
                            }
                        }
                        votes[best.0].expect("labeled superpixel")
                    })
                })
                .collect()
        }
    };
    let classes = assignment
        .labels()
        .iter()
        .map(|&sp| resolved[sp as usize])
        .collect();
    SegmentationMask::new(assignment.height(), assignment.width(), classes)
}
