use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use pointprop::{io, Palette, MAX_CLASSES, UNKNOWN};

use super::ensure_parent;

#[derive(Args, Debug)]
pub struct VisualizeArgs {
    #[arg(long)]
    pub mask: PathBuf,

    /// Image to overlay the colored mask on
    #[arg(long)]
    pub image: Option<PathBuf>,

    /// CSV with header class_id,r,g,b,name
    #[arg(long)]
    pub palette: Option<PathBuf>,

    /// Superpixel assignment PNG whose edges are drawn in white
    #[arg(long)]
    pub boundaries: Option<PathBuf>,

    /// Mask opacity when overlaying
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,

    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &VisualizeArgs) -> Result<()> {
    let mask = io::load_mask(&args.mask, MAX_CLASSES)?;
    let palette = match &args.palette {
        Some(p) => io::load_palette(p)?,
        None => {
            let top = mask.classes().iter().filter(|&&c| c != UNKNOWN).max();
            Palette::default_for(top.map_or(1, |&c| c as usize + 1))
        }
    };
    let mut picture = io::render_mask(&mask, &palette)?;
    if let Some(path) = &args.image {
        let image = io::load_image(path)?;
        picture = io::blend(&image, &picture, args.alpha)?;
    }
    if let Some(path) = &args.boundaries {
        let map = io::load_superpixel_map(path)?;
        picture = io::draw_boundaries(&picture, &map)?;
    }
    ensure_parent(&args.out)?;
    io::save_image(&picture, &args.out)?;
    Ok(())
}
