use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use pointprop::optimizer::LossParts;
use pointprop::pipeline::{FeatureSource, Method, SegmentOutcome, StageTimings};
use pointprop::HyperParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

impl FileRecord {
    pub fn hash(role: &str, path: &Path) -> Result<Self> {
        let bytes =
            fs::read(path).with_context(|| format!("reading {} for hashing", path.display()))?;
        Ok(Self {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

/// One optimization (or SLIC) run inside a manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Absent for the SLIC baseline, whose settings live in `method`.
    pub params: Option<HyperParams>,
    pub effective_superpixels: usize,
    pub sample_size: usize,
    pub loss_trace: Vec<LossParts>,
    pub timings: StageTimings,
    pub total_seconds: f64,
    pub mask: Option<FileRecord>,
}

impl RunRecord {
    pub fn new(params: Option<HyperParams>, out: &SegmentOutcome) -> Self {
        Self {
            params,
            effective_superpixels: out.effective_superpixels,
            sample_size: out.sample_size,
            loss_trace: out.loss_trace.clone(),
            timings: out.timings,
            total_seconds: out.timings.total(),
            mask: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<FileRecord>,
    pub method: Method,
    pub features: FeatureSource,
    pub mode: String,
    pub num_classes: usize,
    pub duplicate_labels: usize,
    pub runs: Vec<RunRecord>,
    pub output: FileRecord,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").with_context(|| format!("writing manifest {}", path.display()))
    }
}

/// `m.png` -> `m.manifest.json`.
pub fn sidecar_path(mask: &Path) -> PathBuf {
    mask.with_extension("manifest.json")
}
