use std::path::PathBuf;

use clap::{Args, ValueEnum};
use pointprop::baseline::SlicParams;
use pointprop::pipeline::{FeatureSource, Method};
use pointprop::PropagationMode;

pub const DEFAULT_NUM_CLASSES: usize = 35;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ours,
    Slic,
}

fn parse_features(s: &str) -> Result<FeatureSource, String> {
    match s {
        "lab" => Ok(FeatureSource::Lab),
        "lab-texture" => Ok(FeatureSource::LabTexture),
        other => match other.strip_prefix("file:") {
            Some(path) if !path.is_empty() => Ok(FeatureSource::File(PathBuf::from(path))),
            _ => Err(format!(
                "expected lab, lab-texture or file:<path>, got '{other}'"
            )),
        },
    }
}

fn parse_mode(s: &str) -> Result<PropagationMode, String> {
    s.parse().map_err(|e: pointprop::Error| e.to_string())
}

/// Inputs shared by `segment`, `ensemble` and `sweep`.
#[derive(Args, Clone, Debug)]
pub struct RunInputs {
    /// RGB image (PNG), or a directory of images
    #[arg(long)]
    pub image: PathBuf,

    /// Point labels CSV with header row,col,class_id, or a directory of them
    #[arg(long)]
    pub labels: PathBuf,

    /// key=value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// lab, lab-texture or file:<path.plsf>
    #[arg(long, default_value = "lab", value_parser = parse_features)]
    pub features: FeatureSource,

    #[arg(long, value_enum, default_value = "ours")]
    pub method: MethodArg,

    #[arg(long, default_value_t = 100)]
    pub slic_k: usize,

    #[arg(long, default_value_t = 10.0)]
    pub slic_compactness: f64,

    #[arg(long, default_value_t = 10)]
    pub slic_iterations: usize,

    /// nearest, substrate:<id> or unknown (overrides the config file)
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<PropagationMode>,

    #[arg(long, default_value_t = DEFAULT_NUM_CLASSES)]
    pub num_classes: usize,

    /// Overrides the configured seed
    #[arg(long)]
    pub seed: Option<u64>,

    /// Redraw the distortion sample at every iteration
    #[arg(long)]
    pub resample: bool,
}

impl RunInputs {
    pub fn method(&self) -> Method {
        match self.method {
            MethodArg::Ours => Method::Ours,
            MethodArg::Slic => Method::Slic(SlicParams {
                k: self.slic_k,
                compactness: self.slic_compactness,
                iterations: self.slic_iterations,
            }),
        }
    }

    /// `file:<dir>` in directory mode resolves to `<dir>/<stem>.plsf`.
    pub fn features_for(&self, stem: &str) -> FeatureSource {
        match &self.features {
            FeatureSource::File(p) if p.is_dir() => {
                FeatureSource::File(p.join(format!("{stem}.plsf")))
            }
            other => other.clone(),
        }
    }
}
