use std::fs;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use pointprop::io;
use pointprop::synthetic::{blob_scene, sample_labels, sample_labels_per_class, two_region_scene};

use super::print_stdout;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SceneKind {
    TwoRegion,
    Blobs,
}

/// Writes `image.png`, `labels.csv` and `truth.png` into `--out-dir`.
#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "two-region")]
    pub kind: SceneKind,

    #[arg(long, default_value_t = 64)]
    pub height: usize,

    #[arg(long, default_value_t = 64)]
    pub width: usize,

    /// Class count for blob scenes (at most 6)
    #[arg(long, default_value_t = 4)]
    pub classes: usize,

    /// Voronoi sites for blob scenes
    #[arg(long, default_value_t = 12)]
    pub sites: usize,

    /// Per-channel color jitter
    #[arg(long, default_value_t = 10)]
    pub noise: i32,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Labels drawn from every class; overrides --labels
    #[arg(long)]
    pub labels_per_class: Option<usize>,

    /// Labels drawn uniformly over the image
    #[arg(long, default_value_t = 20)]
    pub labels: usize,

    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &SynthArgs) -> Result<()> {
    let scene = match args.kind {
        SceneKind::TwoRegion => two_region_scene(args.height, args.width, args.noise, args.seed)?,
        SceneKind::Blobs => blob_scene(
            args.height,
            args.width,
            args.classes,
            args.sites,
            args.noise,
            args.seed,
        )?,
    };
    let label_seed = args.seed.wrapping_add(1);
    let labels = match args.labels_per_class {
        Some(n) => sample_labels_per_class(&scene.truth, scene.num_classes, n, label_seed)?,
        None => sample_labels(&scene.truth, scene.num_classes, args.labels, label_seed)?,
    };
    fs::create_dir_all(&args.out_dir)?;
    io::save_image(&scene.image, args.out_dir.join("image.png"))?;
    io::save_point_labels(&labels, args.out_dir.join("labels.csv"))?;
    io::save_mask(&scene.truth, args.out_dir.join("truth.png"))?;
    print_stdout(&format!(
        "{} classes, {} labels -> {}\n",
        scene.num_classes,
        labels.len(),
        args.out_dir.display()
    ))
}
