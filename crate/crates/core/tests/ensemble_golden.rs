use std::path::PathBuf;

use pointprop::ensemble::run_ensemble;
use pointprop::io::{load_mask, save_mask};
use pointprop::pipeline::{segment, FeatureSource, Method};
use pointprop::synthetic::{blob_scene, sample_labels};
use pointprop::{HyperParams, PropagationMode};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/ensemble_blob_48.png")
}

fn base() -> HyperParams {
    HyperParams {
        n_superpixels: 25,
        n_sample_pixels: 800,
        iterations: 40,
        seed: 7,
        ..Default::default()
    }
}

/// Set `POINTPROP_UPDATE_GOLDEN=1` to rewrite the frozen mask.
#[test]
fn standard_presets_match_frozen_mask() {
    let scene = blob_scene(48, 48, 4, 10, 8, 5).unwrap();
    let labels = sample_labels(&scene.truth, 4, 60, 5).unwrap();
    let presets = HyperParams::standard_ensemble(&base());
    let out = run_ensemble(
        &scene.image,
        &labels,
        &FeatureSource::Lab,
        &Method::Ours,
        &presets,
        PropagationMode::NearestFeature,
        false,
    )
    .unwrap();
    assert_eq!(out.members.len(), 3);
    let report =
        pointprop::metrics::evaluate(&out.fused, &scene.truth, 4, &Default::default()).unwrap();
    assert!(report.pa > 0.85, "fused pa {}", report.pa);
    let path = golden_path();
    if std::env::var_os("POINTPROP_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        save_mask(&out.fused, &path).unwrap();
    }
    let frozen = load_mask(&path, 4).unwrap();
    assert_eq!(out.fused, frozen);
}

#[test]
fn identical_members_fuse_to_single_run() {
    let scene = blob_scene(40, 40, 3, 8, 6, 9).unwrap();
    let labels = sample_labels(&scene.truth, 3, 40, 9).unwrap();
    let hp = base();
    let single = segment(
        &scene.image,
        &labels,
        &FeatureSource::Lab,
        &Method::Ours,
        &hp,
        PropagationMode::LeaveUnknown,
    )
    .unwrap();
    let presets = vec![hp.clone(), hp.clone(), hp];
    let fused = run_ensemble(
        &scene.image,
        &labels,
        &FeatureSource::Lab,
        &Method::Ours,
        &presets,
        PropagationMode::LeaveUnknown,
        false,
    )
    .unwrap();
    assert_eq!(fused.fused, single.mask);
}

#[test]
fn preset_count_is_checked() {
    let scene = blob_scene(16, 16, 2, 4, 0, 1).unwrap();
    let labels = sample_labels(&scene.truth, 2, 10, 1).unwrap();
    let two = vec![base(), base()];
    let run = |allow| {
        run_ensemble(
            &scene.image,
            &labels,
            &FeatureSource::Lab,
            &Method::Ours,
            &two,
            PropagationMode::NearestFeature,
            allow,
        )
    };
    assert!(matches!(run(false), Err(pointprop::Error::Config(_))));
    assert!(run(true).is_ok());
}
