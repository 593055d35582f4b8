//! Lossless file ingestion and emission: RGB images, point-label CSVs, class
//! masks, superpixel index maps and palettes.

use std::collections::BTreeMap;
use std::path::Path;

use image::{ColorType, DynamicImage, GrayImage, ImageBuffer, ImageFormat, Luma, RgbImage};
use log::warn;

use crate::error::{Error, Result};
use crate::types::{
    ImageData, Palette, PaletteEntry, PointLabelSet, SegmentationMask, SuperpixelMap,
};

fn decode(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    image::ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
}

fn decode_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Decode {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Reads an 8-bit PNG as raw sRGB bytes. Grayscale and alpha variants are
/// widened or stripped; 16-bit and float rasters are rejected.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageData> {
    let path = path.as_ref();
    let img = decode(path)?;
    let rgb: RgbImage = match img.color() {
        ColorType::Rgb8 | ColorType::Rgba8 | ColorType::L8 | ColorType::La8 => img.to_rgb8(),
        other => {
            return Err(decode_error(
                path,
                format!("unsupported pixel format {other:?}"),
            ))
        }
    };
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let pixels = rgb.pixels().map(|p| p.0).collect();
    ImageData::new(h, w, pixels)
}

pub fn save_image(image: &ImageData, path: impl AsRef<Path>) -> Result<()> {
    let raw: Vec<u8> = image.pixels().iter().flatten().copied().collect();
    let buf = RgbImage::from_raw(image.width() as u32, image.height() as u32, raw)
        .expect("buffer length matches dimensions");
    write_png(DynamicImage::ImageRgb8(buf), path.as_ref())
}

fn write_png(img: DynamicImage, path: &Path) -> Result<()> {
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::Io(io),
            other => Error::Io(std::io::Error::other(other.to_string())),
        })
}

/// Result of parsing a point-label file.
#[derive(Clone, Debug)]
pub struct LoadedLabels {
    pub labels: PointLabelSet,
    /// Rows dropped because their position was already labeled.
    pub duplicates: usize,
}

/// Parses a `row,col,class_id` CSV (header required) against `image`.
pub fn load_point_labels(
    path: impl AsRef<Path>,
    image: &ImageData,
    num_classes: usize,
) -> Result<LoadedLabels> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path)?;
    parse_point_labels(&text, image.height(), image.width(), num_classes)
}

pub fn parse_point_labels(
    text: &str,
    height: usize,
    width: usize,
    num_classes: usize,
) -> Result<LoadedLabels> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Csv {
        line: 1,
        reason: e.to_string(),
    })?;
    let names: Vec<&str> = header.iter().collect();
    if names != ["row", "col", "class_id"] {
        return Err(Error::Csv {
            line: 1,
            reason: format!(
                "expected header row,col,class_id, found {}",
                names.join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Csv {
            line,
            reason: e.to_string(),
        })?;
        if record.len() != 3 {
            return Err(Error::Csv {
                line,
                reason: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let field = |k: usize| -> Result<u64> {
            record[k].parse::<u64>().map_err(|_| Error::Csv {
                line,
                reason: format!("'{}' is not a non-negative integer", &record[k]),
            })
        };
        let (row, col, class_id) = (field(0)?, field(1)?, field(2)?);
        rows.push((
            row as usize,
            col as usize,
            u32::try_from(class_id).unwrap_or(u32::MAX),
        ));
    }
    let (labels, duplicates) = PointLabelSet::new(height, width, num_classes, rows)?;
    if duplicates > 0 {
        warn!("{duplicates} duplicate point label position(s) ignored; first occurrence kept");
    }
    Ok(LoadedLabels { labels, duplicates })
}

pub fn save_point_labels(labels: &PointLabelSet, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("row,col,class_id\n");
    for e in labels.entries() {
        out.push_str(&format!("{},{},{}\n", e.row, e.col, e.class_id));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes the mask as a single-channel 8-bit PNG of class indices.
pub fn save_mask(mask: &SegmentationMask, path: impl AsRef<Path>) -> Result<()> {
    let buf = GrayImage::from_raw(
        mask.width() as u32,
        mask.height() as u32,
        mask.classes().to_vec(),
    )
    .expect("buffer length matches dimensions");
    write_png(DynamicImage::ImageLuma8(buf), path.as_ref())
}

pub fn load_mask(path: impl AsRef<Path>, num_classes: usize) -> Result<SegmentationMask> {
    let path = path.as_ref();
    let img = decode(path)?;
    let gray = match img {
        DynamicImage::ImageLuma8(g) => g,
        other => {
            return Err(decode_error(
                path,
                format!(
                    "mask must be 8-bit single channel, found {:?}",
                    other.color()
                ),
            ))
        }
    };
    let mask = SegmentationMask::new(
        gray.height() as usize,
        gray.width() as usize,
        gray.into_raw(),
    )?;
    mask.validate_classes(num_classes)?;
    Ok(mask)
}

/// Writes superpixel indices as a 16-bit grayscale PNG.
pub fn save_superpixel_map(map: &SuperpixelMap, path: impl AsRef<Path>) -> Result<()> {
    if map.count() > u16::MAX as usize + 1 {
        return Err(Error::Config(format!(
            "{} superpixels do not fit a 16-bit index map",
            map.count()
        )));
    }
    let raw: Vec<u16> = map.labels().iter().map(|&l| l as u16).collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(map.width() as u32, map.height() as u32, raw)
            .expect("buffer length matches dimensions");
    write_png(DynamicImage::ImageLuma16(buf), path.as_ref())
}

pub fn load_superpixel_map(path: impl AsRef<Path>) -> Result<SuperpixelMap> {
    let path = path.as_ref();
    let img = decode(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let labels: Vec<u32> = match img {
        DynamicImage::ImageLuma16(g) => g.into_raw().into_iter().map(u32::from).collect(),
        DynamicImage::ImageLuma8(g) => g.into_raw().into_iter().map(u32::from).collect(),
        other => {
            return Err(decode_error(
                path,
                format!(
                    "superpixel map must be single channel, found {:?}",
                    other.color()
                ),
            ))
        }
    };
    let count = labels.iter().max().map_or(0, |&m| m as usize + 1);
    SuperpixelMap::new(h, w, count, labels)
}

/// Parses a `class_id,r,g,b,name` palette CSV (header required).
pub fn load_palette(path: impl AsRef<Path>) -> Result<Palette> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Palette(e.to_string()))?;
    let mut entries = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Palette(e.to_string()))?;
        if record.len() < 4 {
            return Err(Error::Palette(format!(
                "line {}: expected class_id,r,g,b,name",
                i + 2
            )));
        }
        let num = |k: usize| -> Result<u8> {
            record[k].parse::<u8>().map_err(|_| {
                Error::Palette(format!("line {}: '{}' is not a byte", i + 2, &record[k]))
            })
        };
        let id = num(0)?;
        let color = [num(1)?, num(2)?, num(3)?];
        let name = record.get(4).unwrap_or("").to_string();
        if entries.insert(id, PaletteEntry { color, name }).is_some() {
            return Err(Error::Palette(format!("class {id} listed twice")));
        }
    }
    Palette::new(entries)
}

/// Colors a mask with `palette`. Fails if the mask uses a class the palette
/// does not define.
pub fn render_mask(mask: &SegmentationMask, palette: &Palette) -> Result<ImageData> {
    let mut pixels = Vec::with_capacity(mask.classes().len());
    for &c in mask.classes() {
        let color = palette.color(c).ok_or_else(|| {
            Error::Palette(format!("mask uses class {c}, which the palette lacks"))
        })?;
        pixels.push(color);
    }
    ImageData::new(mask.height(), mask.width(), pixels)
}

/// Blends `overlay` onto `base` with weight `alpha` for the overlay.
pub fn blend(base: &ImageData, overlay: &ImageData, alpha: f64) -> Result<ImageData> {
    if base.height() != overlay.height() || base.width() != overlay.width() {
        return Err(Error::DimensionMismatch(format!(
            "image is {}x{}, mask is {}x{}",
            base.height(),
            base.width(),
            overlay.height(),
            overlay.width()
        )));
    }
    let pixels = base
        .pixels()
        .iter()
        .zip(overlay.pixels())
        .map(|(b, o)| {
            let mut out = [0u8; 3];
            for k in 0..3 {
                out[k] = (b[k] as f64 * (1.0 - alpha) + o[k] as f64 * alpha).round() as u8;
            }
            out
        })
        .collect();
    ImageData::new(base.height(), base.width(), pixels)
}

/// Paints superpixel boundaries white.
pub fn draw_boundaries(image: &ImageData, map: &SuperpixelMap) -> Result<ImageData> {
    if image.height() != map.height() || image.width() != map.width() {
        return Err(Error::DimensionMismatch(format!(
            "image is {}x{}, superpixel map is {}x{}",
            image.height(),
            image.width(),
            map.height(),
            map.width()
        )));
    }
    let edges = map.boundary_pixels();
    let pixels = image
        .pixels()
        .iter()
        .zip(edges)
        .map(|(&p, e)| if e { [255, 255, 255] } else { p })
        .collect();
    ImageData::new(image.height(), image.width(), pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::UNKNOWN;

    #[test]
    fn two_by_two_black_png_decodes_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("black.png");
        let img = ImageData::new(2, 2, vec![[0, 0, 0]; 4]).unwrap();
        save_image(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn thin_png_is_degenerate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("thin.png");
        RgbImage::new(8, 1).save(&path).unwrap();
        assert!(matches!(
            load_image(&path),
            Err(Error::DegenerateImage {
                height: 1,
                width: 8
            })
        ));
    }

    #[test]
    fn missing_and_corrupt_files() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_image(dir.path().join("nope.png")),
            Err(Error::MissingFile(_))
        ));
        let bad = dir.path().join("bad.png");
        std::fs::write(&bad, b"\x89PNG\r\n\x1a\ngarbage").unwrap();
        assert!(matches!(load_image(&bad), Err(Error::Decode { .. })));
    }

    #[test]
    fn sixteen_bit_rgb_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.png");
        let buf: ImageBuffer<image::Rgb<u16>, Vec<u16>> = ImageBuffer::new(4, 4);
        DynamicImage::ImageRgb16(buf).save(&path).unwrap();
        assert!(matches!(load_image(&path), Err(Error::Decode { .. })));
    }

    #[test]
    fn label_csv_parsing() {
        let loaded = parse_point_labels("row,col,class_id\n0,0,1\n0,0,2\n", 4, 4, 3).unwrap();
        assert_eq!(loaded.duplicates, 1);
        assert_eq!(loaded.labels.entries()[0].class_id, 1);

        assert!(matches!(
            parse_point_labels("row,col,class_id\n600,0,1\n", 512, 512, 35),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(matches!(
            parse_point_labels("row,col,class_id\n", 4, 4, 3),
            Err(Error::EmptyLabelSet)
        ));
        assert!(matches!(
            parse_point_labels("r,c,k\n0,0,0\n", 4, 4, 3),
            Err(Error::Csv { line: 1, .. })
        ));
        assert!(matches!(
            parse_point_labels("row,col,class_id\n0,-1,0\n", 4, 4, 3),
            Err(Error::Csv { line: 2, .. })
        ));
        assert!(matches!(
            parse_point_labels("row,col,class_id\n0,0,99999999999\n", 4, 4, 3),
            Err(Error::BadClass { .. })
        ));
    }

    #[test]
    fn mask_sentinel_is_byte_255() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let mut mask = SegmentationMask::filled(3, 5, 3);
        mask.set(1, 2, UNKNOWN);
        save_mask(&mask, &path).unwrap();
        let raw = image::open(&path).unwrap().into_luma8();
        assert_eq!(raw.get_pixel(2, 1).0[0], 255);
        assert_eq!(raw.get_pixel(0, 0).0[0], 3);
        assert_eq!(load_mask(&path, 35).unwrap(), mask);
    }

    #[test]
    fn mask_with_out_of_range_class_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        save_mask(&SegmentationMask::filled(2, 2, 200), &path).unwrap();
        assert!(matches!(
            load_mask(&path, 35),
            Err(Error::BadClass { class_id: 200, .. })
        ));
    }

    #[test]
    fn superpixel_map_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sp.png");
        let labels: Vec<u32> = (0..12).map(|i| (i * 300) % 1000).collect();
        let map = SuperpixelMap::new(3, 4, 1000, labels).unwrap();
        save_superpixel_map(&map, &path).unwrap();
        let back = load_superpixel_map(&path).unwrap();
        assert_eq!(back.labels(), map.labels());
    }

    #[test]
    fn palette_csv_and_rendering() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pal.csv");
        std::fs::write(
            &path,
            "class_id,r,g,b,name\n0,10,20,30,sand\n1,200,100,0,coral\n",
        )
        .unwrap();
        let palette = load_palette(&path).unwrap();
        assert_eq!(palette.name(1), Some("coral"));

        let mut mask = SegmentationMask::filled(2, 2, 0);
        mask.set(0, 1, UNKNOWN);
        let img = render_mask(&mask, &palette).unwrap();
        assert_eq!(img.get(0, 0), [10, 20, 30]);
        assert_eq!(img.get(0, 1), [255, 0, 255]);

        mask.set(1, 1, 7);
        assert!(matches!(
            render_mask(&mask, &palette),
            Err(Error::Palette(_))
        ));
    }
}
