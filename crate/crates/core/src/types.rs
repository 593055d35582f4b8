//! Domain types shared by every stage of the pipeline.

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};

/// Reserved class value for pixels with no assigned class.
pub const UNKNOWN: u8 = 255;

/// Largest usable class count; class ids must stay below the sentinel.
pub const MAX_CLASSES: usize = UNKNOWN as usize;

/// An 8-bit sRGB image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageData {
    height: usize,
    width: usize,
    pixels: Vec<[u8; 3]>,
}

impl ImageData {
    pub fn new(height: usize, width: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if height < 2 || width < 2 {
            return Err(Error::DegenerateImage { height, width });
        }
        if pixels.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "{} pixels supplied for a {height}x{width} image",
                pixels.len()
            )));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(height * width);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self::new(height, width, pixels)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PointLabel {
    pub row: usize,
    pub col: usize,
    pub class_id: u8,
}

/// Sparse expert annotations on one image.
///
/// Construction validates bounds, classes and uniqueness of positions, so any
/// value of this type satisfies those invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointLabelSet {
    height: usize,
    width: usize,
    num_classes: usize,
    entries: Vec<PointLabel>,
}

impl PointLabelSet {
    /// Validates `entries` against the image bounds and class count. Repeated
    /// positions keep the first occurrence; the number dropped is returned
    /// alongside the set.
    pub fn new(
        height: usize,
        width: usize,
        num_classes: usize,
        entries: impl IntoIterator<Item = (usize, usize, u32)>,
    ) -> Result<(Self, usize)> {
        check_num_classes(num_classes)?;
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        let mut duplicates = 0;
        for (row, col, class_id) in entries {
            if row >= height || col >= width {
                return Err(Error::OutOfBounds {
                    row,
                    col,
                    height,
                    width,
                });
            }
            if class_id as usize >= num_classes || class_id == UNKNOWN as u32 {
                return Err(Error::BadClass {
                    class_id,
                    num_classes,
                });
            }
            if !seen.insert((row, col)) {
                duplicates += 1;
                continue;
            }
            kept.push(PointLabel {
                row,
                col,
                class_id: class_id as u8,
            });
        }
        if kept.is_empty() {
            return Err(Error::EmptyLabelSet);
        }
        Ok((
            Self {
                height,
                width,
                num_classes,
                entries: kept,
            },
            duplicates,
        ))
    }

    pub fn entries(&self) -> &[PointLabel] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Flat pixel indices of the labeled positions, in entry order.
    pub fn pixel_indices(&self) -> Vec<usize> {
        self.entries
            .iter()
            .map(|e| e.row * self.width + e.col)
            .collect()
    }

    pub fn classes(&self) -> Vec<u8> {
        self.entries.iter().map(|e| e.class_id).collect()
    }
}

/// Dense per-pixel class map; [`UNKNOWN`] marks unassigned pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentationMask {
    height: usize,
    width: usize,
    classes: Vec<u8>,
}

impl SegmentationMask {
    pub fn new(height: usize, width: usize, classes: Vec<u8>) -> Result<Self> {
        if classes.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "{} mask values supplied for a {height}x{width} mask",
                classes.len()
            )));
        }
        Ok(Self {
            height,
            width,
            classes,
        })
    }

    pub fn filled(height: usize, width: usize, class: u8) -> Self {
        Self {
            height,
            width,
            classes: vec![class; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn classes(&self) -> &[u8] {
        &self.classes
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.classes[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, class: u8) {
        self.classes[row * self.width + col] = class;
    }

    pub fn unknown_count(&self) -> usize {
        self.classes.iter().filter(|&&c| c == UNKNOWN).count()
    }

    /// Fails with `BadClass` if any non-sentinel value is `>= num_classes`.
    pub fn validate_classes(&self, num_classes: usize) -> Result<()> {
        check_num_classes(num_classes)?;
        match self
            .classes
            .iter()
            .find(|&&c| c != UNKNOWN && c as usize >= num_classes)
        {
            Some(&c) => Err(Error::BadClass {
                class_id: c as u32,
                num_classes,
            }),
            None => Ok(()),
        }
    }

    pub fn same_shape(&self, other: &SegmentationMask) -> bool {
        self.height == other.height && self.width == other.width
    }
}

/// Hard assignment of every pixel to a superpixel index in `[0, count)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperpixelMap {
    height: usize,
    width: usize,
    count: usize,
    labels: Vec<u32>,
}

impl SuperpixelMap {
    pub fn new(height: usize, width: usize, count: usize, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "{} superpixel indices supplied for a {height}x{width} image",
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= count) {
            return Err(Error::DimensionMismatch(format!(
                "superpixel index {bad} out of range for {count} superpixels"
            )));
        }
        Ok(Self {
            height,
            width,
            count,
            labels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    /// True where the 4-neighbour to the right or below has a different index.
    pub fn boundary_pixels(&self) -> Vec<bool> {
        let (h, w) = (self.height, self.width);
        let mut edge = vec![false; h * w];
        for row in 0..h {
            for col in 0..w {
                let here = self.get(row, col);
                if (col + 1 < w && self.get(row, col + 1) != here)
                    || (row + 1 < h && self.get(row + 1, col) != here)
                {
                    edge[row * w + col] = true;
                }
            }
        }
        edge
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaletteEntry {
    pub color: [u8; 3],
    pub name: String,
}

/// Class id to display color and name. [`UNKNOWN`] always renders magenta.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Palette {
    entries: BTreeMap<u8, PaletteEntry>,
}

impl Palette {
    pub const UNKNOWN_COLOR: [u8; 3] = [255, 0, 255];

    pub fn new(entries: BTreeMap<u8, PaletteEntry>) -> Result<Self> {
        if entries.contains_key(&UNKNOWN) {
            return Err(Error::Palette(format!(
                "class {UNKNOWN} is reserved for unknown pixels"
            )));
        }
        let mut colors = HashSet::new();
        colors.insert(Self::UNKNOWN_COLOR);
        for (id, entry) in &entries {
            if !colors.insert(entry.color) {
                return Err(Error::Palette(format!(
                    "color {:?} of class {id} is not distinct",
                    entry.color
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Deterministic palette of `num_classes` distinct colors, spread around
    /// the hue circle by the golden angle.
    pub fn default_for(num_classes: usize) -> Self {
        let mut entries = BTreeMap::new();
        let mut used = HashSet::new();
        used.insert(Self::UNKNOWN_COLOR);
        let mut step = 0usize;
        for class in 0..num_classes.min(MAX_CLASSES) {
            let color = loop {
                let hue = (step as f64 * 137.507_764) % 360.0;
                let band = (step / 12) % 3;
                let sat = [0.75, 0.55, 0.95][band];
                let val = [0.90, 0.70, 0.55][(step / 36) % 3];
                step += 1;
                let c = hsv_to_rgb(hue, sat, val);
                if used.insert(c) {
                    break c;
                }
            };
            entries.insert(
                class as u8,
                PaletteEntry {
                    color,
                    name: format!("class_{class}"),
                },
            );
        }
        Self { entries }
    }

    pub fn color(&self, class: u8) -> Option<[u8; 3]> {
        if class == UNKNOWN {
            return Some(Self::UNKNOWN_COLOR);
        }
        self.entries.get(&class).map(|e| e.color)
    }

    pub fn name(&self, class: u8) -> Option<&str> {
        self.entries.get(&class).map(|e| e.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u8, &PaletteEntry)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }
}

fn hsv_to_rgb(hue: f64, sat: f64, val: f64) -> [u8; 3] {
    let c = val * sat;
    let h = hue / 60.0;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = val - c;
    let to_u8 = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [to_u8(r), to_u8(g), to_u8(b)]
}

pub(crate) fn check_num_classes(num_classes: usize) -> Result<()> {
    if num_classes == 0 || num_classes > MAX_CLASSES {
        return Err(Error::Config(format!(
            "number of classes must be in 1..={MAX_CLASSES}, got {num_classes}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_image_rejected() {
        let err = ImageData::new(1, 8, vec![[0; 3]; 8]).unwrap_err();
        assert!(matches!(
            err,
            Error::DegenerateImage {
                height: 1,
                width: 8
            }
        ));
    }

    #[test]
    fn duplicate_labels_keep_first() {
        let (set, dups) = PointLabelSet::new(4, 4, 3, [(0, 0, 1), (0, 0, 2)]).unwrap();
        assert_eq!(dups, 1);
        assert_eq!(set.len(), 1);
        assert_eq!(set.entries()[0].class_id, 1);
    }

    #[test]
    fn label_validation() {
        assert!(matches!(
            PointLabelSet::new(512, 512, 35, [(600, 0, 1)]),
            Err(Error::OutOfBounds { row: 600, .. })
        ));
        assert!(matches!(
            PointLabelSet::new(4, 4, 35, [(0, 0, 35)]),
            Err(Error::BadClass { class_id: 35, .. })
        ));
        assert!(matches!(
            PointLabelSet::new(4, 4, 255, [(0, 0, 255)]),
            Err(Error::BadClass { .. })
        ));
        assert!(matches!(
            PointLabelSet::new(4, 4, 3, std::iter::empty()),
            Err(Error::EmptyLabelSet)
        ));
    }

    #[test]
    fn default_palette_is_distinct_and_valid() {
        let p = Palette::default_for(MAX_CLASSES);
        assert_eq!(p.len(), MAX_CLASSES);
        let rebuilt = Palette::new(p.entries.clone()).unwrap();
        assert_eq!(rebuilt.color(UNKNOWN), Some([255, 0, 255]));
    }

    #[test]
    fn palette_rejects_duplicate_colors() {
        let mut m = BTreeMap::new();
        for id in 0..2 {
            m.insert(
                id,
                PaletteEntry {
                    color: [1, 2, 3],
                    name: String::new(),
                },
            );
        }
        assert!(Palette::new(m).is_err());
    }

    #[test]
    fn boundaries_mark_index_changes() {
        let map = SuperpixelMap::new(2, 3, 2, vec![0, 0, 1, 0, 0, 1]).unwrap();
        assert_eq!(
            map.boundary_pixels(),
            vec![false, true, false, false, true, false]
        );
    }
}
