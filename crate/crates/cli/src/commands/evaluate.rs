use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use pointprop::io;
use pointprop::metrics::{compute_metrics, confusion_matrix};

use super::{ensure_parent, print_stdout};

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Predicted mask PNG
    #[arg(long)]
    pub pred: PathBuf,

    /// Dense ground-truth mask PNG
    #[arg(long)]
    pub truth: PathBuf,

    #[arg(long)]
    pub num_classes: usize,

    /// Truth classes left out of the evaluation, e.g. 0,3
    #[arg(long, value_delimiter = ',')]
    pub ignore: Vec<u8>,

    /// Write the report JSON here as well as to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long)]
    pub confusion_csv: Option<PathBuf>,
}

pub fn run(args: &EvaluateArgs) -> Result<()> {
    let pred = io::load_mask(&args.pred, args.num_classes)?;
    let truth = io::load_mask(&args.truth, args.num_classes)?;
    let ignore: BTreeSet<u8> = args.ignore.iter().copied().collect();
    let cm = confusion_matrix(&pred, &truth, args.num_classes, &ignore)?;
    if let Some(path) = &args.confusion_csv {
        ensure_parent(path)?;
        fs::write(path, cm.to_csv())?;
    }
    let report = compute_metrics(&cm)?;
    let json = serde_json::to_string_pretty(&report)?;
    let json = json + "\n";
    if let Some(path) = &args.out {
        ensure_parent(path)?;
        fs::write(path, &json)?;
    }
    print_stdout(&json)
}
