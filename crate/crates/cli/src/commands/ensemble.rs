use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use pointprop::config::load_presets;
use pointprop::ensemble::run_ensemble;
use pointprop::io;
use pointprop::pipeline::Method;
use pointprop::{HyperParams, PropagationMode};

use super::{ensure_parent, input_records, resolve_config, usage};
use crate::args::RunInputs;
use crate::manifest::{sidecar_path, FileRecord, RunManifest, RunRecord};

#[derive(Args, Debug)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub inputs: RunInputs,

    /// Fused mask PNG
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long)]
    pub manifest: Option<PathBuf>,

    /// Preset file: key=value blocks separated by lines of ---
    #[arg(
        long,
        conflicts_with = "standard_presets",
        required_unless_present = "standard_presets"
    )]
    pub presets: Option<PathBuf>,

    /// Use the three standard (sigma_t, sigma_x, lambda) triples; seeds are
    /// the base seed plus 0, 1 and 2
    #[arg(long)]
    pub standard_presets: bool,

    /// Accept any number (>= 2) of preset blocks instead of exactly three
    #[arg(long)]
    pub allow_any_count: bool,

    /// Also write each member mask as <out stem>.member<i>.png
    #[arg(long)]
    pub keep_members: bool,
}

fn presets(args: &EnsembleArgs) -> Result<(Vec<HyperParams>, PropagationMode)> {
    let inputs = &args.inputs;
    let Some(path) = &args.presets else {
        let base = resolve_config(inputs)?;
        return Ok((
            HyperParams::standard_ensemble(&base.params).to_vec(),
            base.mode,
        ));
    };
    if inputs.config.is_some() || inputs.seed.is_some() {
        return Err(usage(
            "--config and --seed apply to --standard-presets; put settings in the preset blocks",
        ));
    }
    let blocks = load_presets(path)?;
    let mode = match inputs.mode {
        Some(m) => m,
        None => {
            let first = blocks[0].mode;
            if blocks.iter().any(|b| b.mode != first) {
                return Err(usage(
                    "preset blocks disagree on propagation_mode; pass --mode",
                ));
            }
            first
        }
    };
    mode.validate(inputs.num_classes)?;
    let params = blocks
        .into_iter()
        .map(|b| HyperParams {
            resample_each_iteration: inputs.resample,
            ..b.params
        })
        .collect();
    Ok((params, mode))
}

fn member_path(out: &std::path::Path, i: usize) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.member{i}.png"))
}

pub fn run(args: &EnsembleArgs) -> Result<()> {
    let started = Instant::now();
    let inputs = &args.inputs;
    if inputs.image.is_dir() {
        return Err(usage("ensemble takes a single image"));
    }
    let (params, mode) = presets(args)?;
    let image = io::load_image(&inputs.image)?;
    let loaded = io::load_point_labels(&inputs.labels, &image, inputs.num_classes)?;
    let method = inputs.method();
    let features = inputs.features.clone();
    let out = run_ensemble(
        &image,
        &loaded.labels,
        &features,
        &method,
        &params,
        mode,
        args.allow_any_count,
    )?;

    ensure_parent(&args.out)?;
    io::save_mask(&out.fused, &args.out)?;
    let mut runs = Vec::new();
    for (i, (member, hp)) in out.members.iter().zip(&params).enumerate() {
        let mut record = RunRecord::new(matches!(method, Method::Ours).then(|| hp.clone()), member);
        if args.keep_members {
            let path = member_path(&args.out, i);
            io::save_mask(&member.mask, &path)?;
            record.mask = Some(FileRecord::hash("member", &path)?);
        }
        runs.push(record);
    }
    let mut inputs_rec = input_records(inputs, &inputs.image, &inputs.labels, &features)?;
    if let Some(p) = &args.presets {
        inputs_rec.push(FileRecord::hash("presets", p)?);
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "ensemble".into(),
        inputs: inputs_rec,
        method,
        features,
        mode: mode.to_string(),
        num_classes: inputs.num_classes,
        duplicate_labels: loaded.duplicates,
        runs,
        output: FileRecord::hash("mask", &args.out)?,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let path = args
        .manifest
        .clone()
        .unwrap_or_else(|| sidecar_path(&args.out));
    ensure_parent(&path)?;
    manifest.write(&path)
}
