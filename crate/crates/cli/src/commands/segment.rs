use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use log::info;
use pointprop::config::RunConfig;
use pointprop::io;
use pointprop::pipeline::{self, Method};
use rayon::prelude::*;

use super::{ensure_parent, input_records, resolve_config, usage};
use crate::args::RunInputs;
use crate::manifest::{sidecar_path, FileRecord, RunManifest, RunRecord};

#[derive(Args, Debug)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub inputs: RunInputs,

    /// Output mask PNG, or a directory in directory mode
    #[arg(long)]
    pub out: PathBuf,

    /// Manifest path (default: the mask path with extension .manifest.json)
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    /// Also write the superpixel assignment as a 16-bit PNG (file or directory)
    #[arg(long)]
    pub assignment_out: Option<PathBuf>,

    /// Images processed concurrently in directory mode
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

pub struct Job {
    pub stem: String,
    pub image: PathBuf,
    pub labels: PathBuf,
    pub out: PathBuf,
    pub manifest: PathBuf,
    pub assignment: Option<PathBuf>,
}

pub fn run(args: &SegmentArgs) -> Result<()> {
    let cfg = resolve_config(&args.inputs)?;
    if !args.inputs.image.is_dir() {
        let stem = stem_of(&args.inputs.image);
        let job = Job {
            stem,
            image: args.inputs.image.clone(),
            labels: args.inputs.labels.clone(),
            out: args.out.clone(),
            manifest: args
                .manifest
                .clone()
                .unwrap_or_else(|| sidecar_path(&args.out)),
            assignment: args.assignment_out.clone(),
        };
        return segment_one(&args.inputs, &cfg, &job);
    }

    if args.manifest.is_some() {
        return Err(usage(
            "--manifest names a single file; directory runs write one sidecar per mask",
        ));
    }
    let jobs = directory_jobs(args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()?;
    let results: Vec<Result<()>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| segment_one(&args.inputs, &cfg, job).with_context(|| job.stem.clone()))
            .collect()
    });
    let total = results.len();
    let mut first = None;
    let mut failed = 0;
    for r in results {
        if let Err(e) = r {
            eprintln!("error: {e:#}");
            failed += 1;
            first.get_or_insert(e);
        }
    }
    match first {
        None => Ok(()),
        Some(e) => Err(e.context(format!("{failed} of {total} images failed"))),
    }
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mask".into())
}

/// Pairs `<image dir>/x.png` with `<labels dir>/x.csv`.
fn directory_jobs(args: &SegmentArgs) -> Result<Vec<Job>> {
    let inputs = &args.inputs;
    if !inputs.labels.is_dir() {
        return Err(usage("--image is a directory, so --labels must be one too"));
    }
    if args.out.exists() && !args.out.is_dir() {
        return Err(usage("--image is a directory, so --out must be one too"));
    }
    fs::create_dir_all(&args.out)?;
    if let Some(a) = &args.assignment_out {
        fs::create_dir_all(a)?;
    }
    let mut images: Vec<PathBuf> = fs::read_dir(&inputs.image)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")))
        .collect();
    images.sort();
    if images.is_empty() {
        return Err(usage(format!(
            "no .png images in {}",
            inputs.image.display()
        )));
    }
    Ok(images
        .into_iter()
        .map(|image| {
            let stem = stem_of(&image);
            let out = args.out.join(format!("{stem}.png"));
            Job {
                labels: inputs.labels.join(format!("{stem}.csv")),
                manifest: sidecar_path(&out),
                assignment: args
                    .assignment_out
                    .as_ref()
                    .map(|a| a.join(format!("{stem}.png"))),
                image,
                out,
                stem,
            }
        })
        .collect())
}

pub fn segment_one(inputs: &RunInputs, cfg: &RunConfig, job: &Job) -> Result<()> {
    let started = Instant::now();
    let image = io::load_image(&job.image)?;
    let loaded = io::load_point_labels(&job.labels, &image, inputs.num_classes)?;
    let features = inputs.features_for(&job.stem);
    let method = inputs.method();
    let out = pipeline::segment(
        &image,
        &loaded.labels,
        &features,
        &method,
        &cfg.params,
        cfg.mode,
    )?;

    ensure_parent(&job.out)?;
    io::save_mask(&out.mask, &job.out)?;
    if let Some(a) = &job.assignment {
        ensure_parent(a)?;
        io::save_superpixel_map(&out.assignment, a)?;
    }
    let params = matches!(method, Method::Ours).then(|| cfg.params.clone());
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "segment".into(),
        inputs: input_records(inputs, &job.image, &job.labels, &features)?,
        method,
        features,
        mode: cfg.mode.to_string(),
        num_classes: inputs.num_classes,
        duplicate_labels: loaded.duplicates,
        runs: vec![RunRecord::new(params, &out)],
        output: FileRecord::hash("mask", &job.out)?,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    ensure_parent(&job.manifest)?;
    manifest.write(&job.manifest)?;
    info!(
        "{}: {} superpixels, {:.3}s",
        job.stem, out.effective_superpixels, manifest.wall_clock_seconds
    );
    Ok(())
}
