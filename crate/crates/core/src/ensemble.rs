//! Fusing several independently parameterized runs by per-pixel mode.

use crate::error::{Error, Result};
use crate::optimizer::HyperParams;
use crate::pipeline::{segment, FeatureSource, Method, SegmentOutcome};
use crate::propagation::PropagationMode;
use crate::types::{ImageData, PointLabelSet, SegmentationMask, UNKNOWN};

/// Per-pixel mode of the masks, ignoring UNKNOWN votes unless every mask is
/// UNKNOWN there. Ties go to the lowest class id.
pub fn combine_masks(masks: &[SegmentationMask]) -> Result<SegmentationMask> {
    let first = masks
        .first()
        .ok_or_else(|| Error::Config("no masks to combine".into()))?;
    if let Some(bad) = masks.iter().find(|m| !m.same_shape(first)) {
        return Err(Error::DimensionMismatch(format!(
            "cannot combine {}x{} with {}x{}",
            first.height(),
            first.width(),
            bad.height(),
            bad.width()
        )));
    }
    let mut counts = [0u16; 256];
    let classes = (0..first.classes().len())
        .map(|p| {
            counts.iter_mut().for_each(|c| *c = 0);
            for m in masks {
                counts[m.classes()[p] as usize] += 1;
            }
            let mut best = UNKNOWN;
            let mut best_count = 0;
            for (class, &n) in counts[..UNKNOWN as usize].iter().enumerate() {
                if n > best_count {
                    best = class as u8;
                    best_count = n;
                }
            }
            best
        })
        .collect();
    SegmentationMask::new(first.height(), first.width(), classes)
}

#[derive(Clone, Debug)]
pub struct EnsembleOutcome {
    pub fused: SegmentationMask,
    pub members: Vec<SegmentOutcome>,
}

/// Runs every preset independently (concurrently) and fuses the masks.
/// Exactly three presets are expected unless `allow_any_count` is set, in
/// which case any number `>= 2` works.
pub fn run_ensemble(
    image: &ImageData,
    labels: &PointLabelSet,
    source: &FeatureSource,
    method: &Method,
    presets: &[HyperParams],
    mode: PropagationMode,
    allow_any_count: bool,
) -> Result<EnsembleOutcome> {
    let ok = if allow_any_count {
        presets.len() >= 2
    } else {
        presets.len() == 3
    };
    if !ok {
        return Err(Error::Config(format!(
            "ensemble needs {} presets, got {}",
            if allow_any_count {
                "at least 2"
            } else {
                "exactly 3"
            },
            presets.len()
        )));
    }
    let results: Vec<Result<SegmentOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = presets
            .iter()
            .map(|hp| scope.spawn(move || segment(image, labels, source, method, hp, mode)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("ensemble member panicked"))
            .collect()
    });
    let members = results.into_iter().collect::<Result<Vec<_>>>()?;
    let masks: Vec<SegmentationMask> = members.iter().map(|m| m.mask.clone()).collect();
    Ok(EnsembleOutcome {
        fused: combine_masks(&masks)?,
        members,
    })
}
