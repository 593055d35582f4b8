//! Flat `key=value` run configuration and multi-block ensemble preset files.
//!
//! Recognised keys: `sigma_t`, `sigma_x`, `lambda`, `n_superpixels`,
//! `n_sample_pixels`, `learning_rate`, `iterations`, `seed`,
//! `propagation_mode`. Blank lines and lines starting with `#` are skipped.
//! Missing keys keep their defaults; unknown or repeated keys are errors.

use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::HyperParams;
use crate::propagation::PropagationMode;

pub const KEYS: [&str; 9] = [
    "sigma_t",
    "sigma_x",
    "lambda",
    "n_superpixels",
    "n_sample_pixels",
    "learning_rate",
    "iterations",
    "seed",
    "propagation_mode",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: HyperParams,
    pub mode: PropagationMode,
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: invalid value '{value}' for {key}")))
}

impl RunConfig {
    /// Parses one block of `key=value` lines. `first_line` offsets the line
    /// numbers used in messages.
    pub fn parse_block(text: &str, first_line: usize) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = first_line + i;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {line}: expected key=value, got '{trimmed}'"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {line}: {key} given twice")));
            }
            let p = &mut cfg.params;
            match key {
                "sigma_t" => p.sigma_t = parse_value(key, value, line)?,
                "sigma_x" => p.sigma_x = parse_value(key, value, line)?,
                "lambda" => p.lambda = parse_value(key, value, line)?,
                "n_superpixels" => p.n_superpixels = parse_value(key, value, line)?,
                "n_sample_pixels" => p.n_sample_pixels = parse_value(key, value, line)?,
                "learning_rate" => p.learning_rate = parse_value(key, value, line)?,
                "iterations" => p.iterations = parse_value(key, value, line)?,
                "seed" => p.seed = parse_value(key, value, line)?,
                "propagation_mode" => cfg.mode = value.parse()?,
                other => {
                    return Err(Error::Config(format!(
                        "line {line}: unknown key '{other}' (expected one of {})",
                        KEYS.join(", ")
                    )))
                }
            }
        }
        cfg.params.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::parse_block(&std::fs::read_to_string(path)?, 1)
    }

    /// Renders every key, so the output reproduces this configuration exactly.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        format!(
            "sigma_t={:?}\nsigma_x={:?}\nlambda={:?}\nn_superpixels={}\nn_sample_pixels={}\n\
             learning_rate={:?}\niterations={}\nseed={}\npropagation_mode={}\n",
            p.sigma_t,
            p.sigma_x,
            p.lambda,
            p.n_superpixels,
            p.n_sample_pixels,
            p.learning_rate,
            p.iterations,
            p.seed,
            self.mode
        )
    }
}

/// Splits a preset file into blocks separated by lines consisting of `---`.
pub fn parse_presets(text: &str) -> Result<Vec<RunConfig>> {
    let mut blocks = Vec::new();
    let mut current = String::new();
    let mut start = 1;
    for (i, line) in text.lines().enumerate() {
        if line.trim() == "---" {
            blocks.push(RunConfig::parse_block(&current, start)?);
            current.clear();
            start = i + 2;
        } else {
            current.push_str(line);
            current.push('\n');
        }
    }
    blocks.push(RunConfig::parse_block(&current, start)?);
    Ok(blocks)
}

pub fn load_presets(path: impl AsRef<Path>) -> Result<Vec<RunConfig>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    parse_presets(&std::fs::read_to_string(path)?)
}
