use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, ValueEnum};
use log::info;
use pointprop::io;
use pointprop::metrics::evaluate;
use pointprop::pipeline;

use super::{ensure_parent, resolve_config, usage};
use crate::args::RunInputs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Lambda,
    #[value(name = "sigma_t")]
    SigmaT,
    #[value(name = "sigma_x")]
    SigmaX,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub inputs: RunInputs,

    #[arg(long, value_enum)]
    pub param: SweepParam,

    /// Comma-separated values, one run each
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,

    /// Dense ground-truth mask PNG
    #[arg(long)]
    pub truth: PathBuf,

    #[arg(long, value_delimiter = ',')]
    pub ignore: Vec<u8>,

    /// Output CSV
    #[arg(long)]
    pub out: PathBuf,
}

pub const HEADER: &str = "value,pa,mpa,miou,final_loss,seconds";

pub fn run(args: &SweepArgs) -> Result<()> {
    let inputs = &args.inputs;
    if inputs.image.is_dir() {
        return Err(usage("sweep takes a single image"));
    }
    let base = resolve_config(inputs)?;
    let image = io::load_image(&inputs.image)?;
    let labels = io::load_point_labels(&inputs.labels, &image, inputs.num_classes)?.labels;
    let truth = io::load_mask(&args.truth, inputs.num_classes)?;
    let ignore: BTreeSet<u8> = args.ignore.iter().copied().collect();
    let method = inputs.method();

    let mut csv = format!("{HEADER}\n");
    for &value in &args.values {
        let mut hp = base.params.clone();
        match args.param {
            SweepParam::Lambda => hp.lambda = value,
            SweepParam::SigmaT => hp.sigma_t = value,
            SweepParam::SigmaX => hp.sigma_x = value,
        }
        let started = Instant::now();
        let out = pipeline::segment(&image, &labels, &inputs.features, &method, &hp, base.mode)?;
        let seconds = started.elapsed().as_secs_f64();
        let report = evaluate(&out.mask, &truth, inputs.num_classes, &ignore)?;
        let final_loss = out
            .final_loss()
            .map(|l| l.total.to_string())
            .unwrap_or_default();
        writeln!(
            csv,
            "{value},{},{},{},{final_loss},{seconds}",
            report.pa, report.mpa, report.miou
        )?;
        info!("{:?}={value}: pa {:.4}", args.param, report.pa);
    }
    ensure_parent(&args.out)?;
    fs::write(&args.out, csv)?;
    Ok(())
}
