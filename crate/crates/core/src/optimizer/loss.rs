//! Gaussian potentials, fuzzy memberships, the distortion and conflict
//! terms, and the analytic gradient of their weighted sum with respect to
//! the superpixel centers.
//!
//! Notation used below, per pixel `p` and center `i`:
//!
//! * `e_{p,i} = -|T_p - T_i|^2 / (2 sigma_t^2) - |X_p - X_i|^2 / (2 sigma_x^2)`
//! * `Q_{p,i} = exp(e_{p,i})`, `mu_{p,i} = Q_{p,i} / sum_j Q_{p,j}`
//! * `d_{p,i} = |F_p - S_i|^2` over the full embedding
//!
//! Gradients flow through the memberships as well as through `d`. With
//! `g_{p,i} = W (F_p - S_i)`, `W = diag(1/sigma_t^2 .., 1/sigma_x^2 ..)`,
//! `d mu_{p,j} / d S_i = mu_{p,j} (delta_ij - mu_{p,i}) g_{p,i}`, so any loss
//! `sum_j c_{p,j} mu_{p,j}` contributes `mu_{p,i} (c_{p,i} - cbar_p) g_{p,i}`
//! where `cbar_p = sum_j mu_{p,j} c_{p,j}`.

use super::state::{SampleSet, SuperpixelState};
use super::HyperParams;
use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::types::PointLabelSet;

/// Potentials `q` and memberships `mu` for a subset of pixels, row-major
/// (`pixels.len()` rows by `k` columns).
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipMatrix {
    pub pixels: Vec<usize>,
    pub k: usize,
    pub q: Vec<f64>,
    /// Empty until [`compute_memberships`] runs.
    pub mu: Vec<f64>,
}

impl MembershipMatrix {
    pub fn rows(&self) -> usize {
        self.pixels.len()
    }

    pub fn q_row(&self, r: usize) -> &[f64] {
        &self.q[r * self.k..(r + 1) * self.k]
    }

    pub fn mu_row(&self, r: usize) -> &[f64] {
        &self.mu[r * self.k..(r + 1) * self.k]
    }
}

#[derive(Clone, Copy, Debug)]
struct Widths {
    inv_t: f64,
    inv_x: f64,
}

impl Widths {
    fn new(hp: &HyperParams) -> Self {
        Self {
            inv_t: 1.0 / (hp.sigma_t * hp.sigma_t),
            inv_x: 1.0 / (hp.sigma_x * hp.sigma_x),
        }
    }
}

/// `e_{p,i}` for one pixel against one center.
#[inline]
fn log_potential(f: &[f64], s: &[f64], d: usize, w: Widths) -> f64 {
    let dt: f64 = f[..d]
        .iter()
        .zip(&s[..d])
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let dx: f64 = f[d..]
        .iter()
        .zip(&s[d..])
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    -0.5 * (dt * w.inv_t + dx * w.inv_x)
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_dims(fm: &FeatureMap, state: &SuperpixelState) {
    assert_eq!(
        fm.dim(),
        state.feature_dim(),
        "feature dimension of map and centers differ"
    );
    assert!(fm.has_coords(), "coordinates must be attached");
}

/// Fills `q` for each listed pixel against every center.
pub fn compute_potentials(
    fm: &FeatureMap,
    state: &SuperpixelState,
    pixels: &[usize],
    hp: &HyperParams,
) -> MembershipMatrix {
    check_dims(fm, state);
    let (k, d, e) = (state.count(), fm.dim(), fm.embedding_dim());
    let w = Widths::new(hp);
    let mut emb = vec![0.0; e];
    let mut q = Vec::with_capacity(pixels.len() * k);
    for &p in pixels {
        fm.embedding_into(p, &mut emb);
        for i in 0..k {
            q.push(log_potential(&emb, state.center(i), d, w).exp());
        }
    }
    MembershipMatrix {
        pixels: pixels.to_vec(),
        k,
        q,
        mu: Vec::new(),
    }
}

/// Row-normalizes `q` into `mu`.
pub fn compute_memberships(mut mm: MembershipMatrix) -> Result<MembershipMatrix> {
    let k = mm.k;
    let mut mu = Vec::with_capacity(mm.q.len());
    for (r, row) in mm.q.chunks_exact(k).enumerate() {
        let sum: f64 = row.iter().sum();
        if !sum.is_finite() || sum <= 0.0 {
            return Err(Error::DegenerateRow {
                pixel: mm.pixels[r],
            });
        }
        mu.extend(row.iter().map(|q| q / sum));
    }
    mm.mu = mu;
    Ok(mm)
}

pub fn memberships(
    fm: &FeatureMap,
    state: &SuperpixelState,
    pixels: &[usize],
    hp: &HyperParams,
) -> Result<MembershipMatrix> {
    compute_memberships(compute_potentials(fm, state, pixels, hp))
}

/// Mean over the rows of `mm` of `sum_i |F_p - S_i|^2 mu_{p,i}`.
pub fn distortion_loss(fm: &FeatureMap, state: &SuperpixelState, mm: &MembershipMatrix) -> f64 {
    if mm.rows() == 0 {
        return 0.0;
    }
    let mut emb = vec![0.0; fm.embedding_dim()];
    let mut total = 0.0;
    for (r, &p) in mm.pixels.iter().enumerate() {
        fm.embedding_into(p, &mut emb);
        total += mm
            .mu_row(r)
            .iter()
            .enumerate()
            .map(|(i, m)| sq_dist(&emb, state.center(i)) * m)
            .sum::<f64>();
    }
    total / mm.rows() as f64
}

/// Per-label sums of the memberships of every label with a different class,
/// and the number of unordered conflicting pairs.
struct ConflictPartners {
    /// `v_a = sum_{b : l_b != l_a} mu_b`, row-major like `mu`.
    partners: Vec<f64>,
    pairs: f64,
}

fn conflict_partners(mm: &MembershipMatrix, classes: &[u8]) -> ConflictPartners {
    assert_eq!(mm.rows(), classes.len(), "one membership row per label");
    let k = mm.k;
    let mut present: Vec<u8> = classes.to_vec();
    present.sort_unstable();
    present.dedup();
    let slot = |c: u8| present.binary_search(&c).expect("class present");

    let mut class_sums = vec![0.0; present.len() * k];
    let mut class_counts = vec![0.0f64; present.len()];
    for (r, &c) in classes.iter().enumerate() {
        let s = slot(c);
        class_counts[s] += 1.0;
        for (acc, m) in class_sums[s * k..(s + 1) * k].iter_mut().zip(mm.mu_row(r)) {
            *acc += m;
        }
    }
    // Sum of all other classes, accumulated directly to avoid cancellation.
    let mut others = vec![0.0; present.len() * k];
    for s in 0..present.len() {
        for t in (0..present.len()).filter(|&t| t != s) {
            for i in 0..k {
                others[s * k + i] += class_sums[t * k + i];
            }
        }
    }
    let mut pairs = 0.0;
    for s in 0..present.len() {
        for t in s + 1..present.len() {
            pairs += class_counts[s] * class_counts[t];
        }
    }
    let mut partners = Vec::with_capacity(classes.len() * k);
    for &c in classes {
        let s = slot(c);
        partners.extend_from_slice(&others[s * k..(s + 1) * k]);
    }
    ConflictPartners { partners, pairs }
}

/// Sum of `mu_a . mu_b` over unordered label pairs with different classes,
/// divided by the number of such pairs; zero when there are none.
///
/// Rows of `mm` must be the labeled pixels in `labels` order.
pub fn conflict_loss(mm: &MembershipMatrix, labels: &PointLabelSet) -> f64 {
    conflict_loss_for_classes(mm, &labels.classes())
}

pub(crate) fn conflict_loss_for_classes(mm: &MembershipMatrix, classes: &[u8]) -> f64 {
    let cp = conflict_partners(mm, classes);
    if cp.pairs == 0.0 {
        return 0.0;
    }
    let k = mm.k;
    let doubled: f64 = (0..mm.rows())
        .map(|r| {
            mm.mu_row(r)
                .iter()
                .zip(&cp.partners[r * k..(r + 1) * k])
                .map(|(a, b)| a * b)
                .sum::<f64>()
        })
        .sum();
    0.5 * doubled / cp.pairs
}

/// The two loss terms and their weighted sum.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossParts {
    pub distortion: f64,
    pub conflict: f64,
    pub total: f64,
}

pub fn total_loss(
    fm: &FeatureMap,
    state: &SuperpixelState,
    sample: &SampleSet,
    labels: &PointLabelSet,
    hp: &HyperParams,
) -> Result<LossParts> {
    let dist_mm = memberships(fm, state, &sample.distortion_pixels, hp)?;
    let label_mm = memberships(fm, state, &sample.label_pixels, hp)?;
    let distortion = distortion_loss(fm, state, &dist_mm);
    let conflict = conflict_loss(&label_mm, labels);
    Ok(LossParts {
        distortion,
        conflict,
        total: distortion + hp.lambda * conflict,
    })
}

/// Adds `scale * mu_{p,i} (c_{p,i} - cbar_p) g_{p,i}` for one pixel into `grad`.
#[allow(clippy::too_many_arguments)]
fn add_membership_term(
    grad: &mut [f64],
    emb: &[f64],
    state: &SuperpixelState,
    mu: &[f64],
    costs: &[f64],
    scale: f64,
    d: usize,
    w: Widths,
) {
    let e = emb.len();
    let cbar: f64 = mu.iter().zip(costs).map(|(m, c)| m * c).sum();
    for (i, (&m, &c)) in mu.iter().zip(costs).enumerate() {
        let coef = scale * m * (c - cbar);
        if coef == 0.0 {
            continue;
        }
        let s = state.center(i);
        let g = &mut grad[i * e..(i + 1) * e];
        for j in 0..e {
            let wj = if j < d { w.inv_t } else { w.inv_x };
            g[j] += coef * wj * (emb[j] - s[j]);
        }
    }
}

/// Loss parts and the exact gradient of `total` with respect to every
/// center component, flat in the layout of [`SuperpixelState::centers`].
pub fn loss_and_gradient(
    fm: &FeatureMap,
    state: &SuperpixelState,
    sample: &SampleSet,
    labels: &PointLabelSet,
    hp: &HyperParams,
) -> Result<(LossParts, Vec<f64>)> {
    check_dims(fm, state);
    let (k, d, e) = (state.count(), fm.dim(), fm.embedding_dim());
    let w = Widths::new(hp);
    let mut grad = vec![0.0; k * e];
    let mut emb = vec![0.0; e];
    let mut costs = vec![0.0; k];

    // Distortion term.
    let dist_mm = memberships(fm, state, &sample.distortion_pixels, hp)?;
    let n = dist_mm.rows();
    let mut distortion = 0.0;
    if n > 0 {
        let inv_n = 1.0 / n as f64;
        for (r, &p) in dist_mm.pixels.iter().enumerate() {
            fm.embedding_into(p, &mut emb);
            let mu = dist_mm.mu_row(r);
            for (i, c) in costs.iter_mut().enumerate() {
                *c = sq_dist(&emb, state.center(i));
            }
            distortion += mu.iter().zip(&costs).map(|(m, c)| m * c).sum::<f64>();
            // Direct term: d/dS_i |F_p - S_i|^2 = -2 (F_p - S_i).
            for (i, &m) in mu.iter().enumerate() {
                let s = state.center(i);
                let g = &mut grad[i * e..(i + 1) * e];
                for j in 0..e {
                    g[j] -= 2.0 * inv_n * m * (emb[j] - s[j]);
                }
            }
            add_membership_term(&mut grad, &emb, state, mu, &costs, inv_n, d, w);
        }
        distortion *= inv_n;
    }

    // Conflict term.
    let label_mm = memberships(fm, state, &sample.label_pixels, hp)?;
    let classes = labels.classes();
    let cp = conflict_partners(&label_mm, &classes);
    let mut conflict = 0.0;
    if cp.pairs > 0.0 {
        let mut doubled = 0.0;
        let scale = hp.lambda / cp.pairs;
        for (r, &p) in label_mm.pixels.iter().enumerate() {
            let mu = label_mm.mu_row(r);
            let partners = &cp.partners[r * k..(r + 1) * k];
            doubled += mu.iter().zip(partners).map(|(a, b)| a * b).sum::<f64>();
            if scale != 0.0 {
                fm.embedding_into(p, &mut emb);
                add_membership_term(&mut grad, &emb, state, mu, partners, scale, d, w);
            }
        }
        conflict = 0.5 * doubled / cp.pairs;
    }

    Ok((
        LossParts {
            distortion,
            conflict,
            total: distortion + hp.lambda * conflict,
        },
        grad,
    ))
}

/// Gradient of [`total_loss`] with respect to the centers.
pub fn loss_gradient(
    fm: &FeatureMap,
    state: &SuperpixelState,
    sample: &SampleSet,
    labels: &PointLabelSet,
    hp: &HyperParams,
) -> Result<Vec<f64>> {
    loss_and_gradient(fm, state, sample, labels, hp).map(|(_, g)| g)
}
