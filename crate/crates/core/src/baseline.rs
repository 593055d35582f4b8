//! Classic SLIC superpixels, used as the comparison baseline.
//!
//! Seeds follow the same grid factorization as the optimized method, so both
//! start from an identical partition.

use std::collections::VecDeque;

use crate::features::{rgb_to_lab, GridShape};
use crate::types::{ImageData, SuperpixelMap};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SlicParams {
    pub k: usize,
    pub compactness: f64,
    pub iterations: usize,
}

impl Default for SlicParams {
    fn default() -> Self {
        Self {
            k: 100,
            compactness: 10.0,
            iterations: 10,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Center {
    lab: [f64; 3],
    row: f64,
    col: f64,
}

/// SLIC with `d = d_lab + (compactness / S) * d_xy`, `S = sqrt(HW / k)`,
/// searching a `2S x 2S` window around each center, followed by connectivity
/// enforcement. Output indices are dense and ordered by first appearance in
/// raster order.
pub fn slic_segment(
    image: &ImageData,
    k: usize,
    compactness: f64,
    iterations: usize,
) -> SuperpixelMap {
    let (h, w) = (image.height(), image.width());
    let k = k.max(1);
    let grid = GridShape::for_count(k, h, w);
    let lab = rgb_to_lab(image);
    let step = ((h * w) as f64 / k as f64).sqrt();
    let spatial_weight = compactness / step;

    let cell_height = h as f64 / grid.rows as f64;
    let cell_width = w as f64 / grid.cols as f64;
    let mut centers: Vec<Center> = (0..grid.count())
        .map(|cell| {
            let (r, c) = (cell / grid.cols, cell % grid.cols);
            let row = (r as f64 + 0.5) * cell_height;
            let col = (c as f64 + 0.5) * cell_width;
            let p = (row as usize).min(h - 1) * w + (col as usize).min(w - 1);
            let f = lab.feature(p);
            Center {
                lab: [f[0], f[1], f[2]],
                row,
                col,
            }
        })
        .collect();

    // Start from the grid partition so pixels outside every window stay assigned.
    let mut labels: Vec<u32> = (0..h * w)
        .map(|p| {
            let r = ((p / w) * grid.rows / h).min(grid.rows - 1);
            let c = ((p % w) * grid.cols / w).min(grid.cols - 1);
            (r * grid.cols + c) as u32
        })
        .collect();
    let mut dist = vec![f64::INFINITY; h * w];

    for _ in 0..iterations {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        for (i, ctr) in centers.iter().enumerate() {
            let r0 = (ctr.row - step).floor().max(0.0) as usize;
            let r1 = ((ctr.row + step).ceil() as usize).min(h);
            let c0 = (ctr.col - step).floor().max(0.0) as usize;
            let c1 = ((ctr.col + step).ceil() as usize).min(w);
            for row in r0..r1 {
                for col in c0..c1 {
                    let p = row * w + col;
                    let f = lab.feature(p);
                    let d_lab = ((f[0] - ctr.lab[0]).powi(2)
                        + (f[1] - ctr.lab[1]).powi(2)
                        + (f[2] - ctr.lab[2]).powi(2))
                    .sqrt();
                    let d_xy = ((row as f64 + 0.5 - ctr.row).powi(2)
                        + (col as f64 + 0.5 - ctr.col).powi(2))
                    .sqrt();
                    let d = d_lab + spatial_weight * d_xy;
                    if d < dist[p] {
                        dist[p] = d;
                        labels[p] = i as u32;
                    }
                }
            }
        }

        let mut sums = vec![[0.0f64; 6]; centers.len()];
        for (p, &l) in labels.iter().enumerate() {
            let f = lab.feature(p);
            let s = &mut sums[l as usize];
            s[0] += f[0];
            s[1] += f[1];
            s[2] += f[2];
            s[3] += (p / w) as f64 + 0.5;
            s[4] += (p % w) as f64 + 0.5;
            s[5] += 1.0;
        }
        for (ctr, s) in centers.iter_mut().zip(&sums) {
            if s[5] > 0.0 {
                ctr.lab = [s[0] / s[5], s[1] / s[5], s[2] / s[5]];
                ctr.row = s[3] / s[5];
                ctr.col = s[4] / s[5];
            }
        }
    }

    enforce_connectivity(h, w, &labels)
}

/// Keeps the largest 4-connected piece of every label and merges each
/// remaining piece into the largest adjacent kept superpixel.
pub fn enforce_connectivity(h: usize, w: usize, labels: &[u32]) -> SuperpixelMap {
    let n = h * w;
    let neighbours = |p: usize| {
        let (r, c) = (p / w, p % w);
        [
            (r > 0).then(|| p - w),
            (r + 1 < h).then(|| p + w),
            (c > 0).then(|| p - 1),
            (c + 1 < w).then(|| p + 1),
        ]
        .into_iter()
        .flatten()
    };

    // Connected components of equal labels.
    let mut comp = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = members.len();
        let mut pixels = vec![start];
        comp[start] = id;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            for q in neighbours(p) {
                if comp[q] == usize::MAX && labels[q] == labels[start] {
                    comp[q] = id;
                    pixels.push(q);
                    queue.push_back(q);
                }
            }
        }
        members.push(pixels);
    }

    let n_labels = labels.iter().max().map_or(0, |&m| m as usize + 1);
    let mut largest: Vec<Option<usize>> = vec![None; n_labels];
    for (id, pix) in members.iter().enumerate() {
        let l = labels[pix[0]] as usize;
        match largest[l] {
            Some(best) if members[best].len() >= pix.len() => {}
            _ => largest[l] = Some(id),
        }
    }

    // owner[c] = kept component that c has been merged into.
    let mut owner: Vec<Option<usize>> = vec![None; members.len()];
    let mut size: Vec<usize> = members.iter().map(Vec::len).collect();
    for id in largest.iter().flatten() {
        owner[*id] = Some(*id);
    }
    let mut pending: Vec<usize> = (0..members.len()).filter(|&c| owner[c].is_none()).collect();
    while !pending.is_empty() {
        let mut still = Vec::new();
        for &c in &pending {
            let mut best: Option<usize> = None;
            for &p in &members[c] {
                for q in neighbours(p) {
                    if let Some(o) = owner[comp[q]] {
                        if o != c {
                            best = match best {
                                Some(b) if size[b] > size[o] || (size[b] == size[o] && b < o) => {
                                    Some(b)
                                }
                                _ => Some(o),
                            };
                        }
                    }
                }
            }
            match best {
                Some(target) => {
                    owner[c] = Some(target);
                    size[target] += members[c].len();
                }
                None => still.push(c),
            }
        }
        assert!(still.len() < pending.len(), "orphan components unreachable");
        pending = still;
    }

    let mut relabel = vec![u32::MAX; members.len()];
    let mut next = 0u32;
    let out: Vec<u32> = (0..n)
        .map(|p| {
            let root = owner[comp[p]].expect("every component resolved");
            if relabel[root] == u32::MAX {
                relabel[root] = next;
                next += 1;
            }
            relabel[root]
        })
        .collect();
    SuperpixelMap::new(h, w, next as usize, out).expect("dense relabeling")
}

/// True if every superpixel index forms one 4-connected region.
pub fn is_four_connected(map: &SuperpixelMap) -> bool {
    let (h, w) = (map.height(), map.width());
    let rebuilt = enforce_connectivity(h, w, map.labels());
    // Enforcement only changes the partition when some label is split.
    let mut seen = vec![None; map.count()];
    for (a, b) in map.labels().iter().zip(rebuilt.labels()) {
        match seen[*a as usize] {
            None => seen[*a as usize] = Some(*b),
            Some(prev) if prev != *b => return false,
            _ => {}
        }
    }
    rebuilt.count() == seen.iter().filter(|s| s.is_some()).count()
}
