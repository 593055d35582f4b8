//! `pointprop`: dense segmentation masks from sparse point labels.
//!
//! Exit status is 0 on success, 2 for usage or input validation errors and 1
//! for runtime failures.

mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{ensemble, evaluate, segment, sweep, synth, visualize};

#[derive(Parser, Debug)]
#[command(
    name = "pointprop",
    version,
    about = "Dense segmentation masks from sparse point labels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize superpixels and propagate point labels into a mask
    Segment(segment::SegmentArgs),
    /// Run several parameterizations and fuse the masks by per-pixel mode
    Ensemble(ensemble::EnsembleArgs),
    /// Pixel accuracy, mean class accuracy and mean IoU against a dense truth
    Evaluate(evaluate::EvaluateArgs),
    /// One run per value of a hyperparameter, scored against a dense truth
    Sweep(sweep::SweepArgs),
    /// Render a mask with a palette, optionally over the image and with superpixel edges
    Visualize(visualize::VisualizeArgs),
    /// Generate a synthetic image, dense truth and point labels
    Synth(synth::SynthArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Segment(a) => segment::run(a),
        Command::Ensemble(a) => ensemble::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Visualize(a) => visualize::run(a),
        Command::Synth(a) => synth::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
