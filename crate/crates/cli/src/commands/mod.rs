pub mod ensemble;
pub mod evaluate;
pub mod segment;
pub mod sweep;
pub mod synth;
pub mod visualize;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Result;
use pointprop::config::RunConfig;
use pointprop::pipeline::FeatureSource;

use crate::args::RunInputs;
use crate::manifest::FileRecord;

/// A command-line usage problem that clap cannot catch on its own.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// 2 for usage and input validation problems, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<pointprop::Error>() {
            return if e.is_validation() { 2 } else { 1 };
        }
        if cause.downcast_ref::<Usage>().is_some() {
            return 2;
        }
    }
    1
}

/// Config file (or defaults) with command-line overrides applied.
pub fn resolve_config(inputs: &RunInputs) -> Result<RunConfig> {
    let mut cfg = match &inputs.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = inputs.seed {
        cfg.params.seed = seed;
    }
    if let Some(mode) = inputs.mode {
        cfg.mode = mode;
    }
    cfg.params.resample_each_iteration = inputs.resample;
    cfg.params.validate()?;
    cfg.mode.validate(inputs.num_classes)?;
    Ok(cfg)
}

pub fn input_records(
    inputs: &RunInputs,
    image: &Path,
    labels: &Path,
    features: &FeatureSource,
) -> Result<Vec<FileRecord>> {
    let mut records = vec![
        FileRecord::hash("image", image)?,
        FileRecord::hash("labels", labels)?,
    ];
    if let Some(cfg) = &inputs.config {
        records.push(FileRecord::hash("config", cfg)?);
    }
    if let FeatureSource::File(p) = features {
        records.push(FileRecord::hash("features", p)?);
    }
    Ok(records)
}

pub fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(())
}

/// Writes to stdout, treating a closed reader (e.g. `| head`) as success.
pub fn print_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::Context;

    #[test]
    fn exit_codes() {
        let validation: anyhow::Error = pointprop::Error::EmptyLabelSet.into();
        assert_eq!(exit_code(&validation), 2);
        let runtime: anyhow::Error = pointprop::Error::NonFiniteLoss { iteration: 3 }.into();
        assert_eq!(exit_code(&runtime), 1);
        let wrapped = Err::<(), _>(pointprop::Error::EmptyEvaluation)
            .context("evaluating")
            .unwrap_err();
        assert_eq!(exit_code(&wrapped), 2);
        assert_eq!(exit_code(&usage("bad")), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 1);
    }
}
