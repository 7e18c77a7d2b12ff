//! Post-processing of coefficient sequences and trajectories.
//!
//! Dissipation leaves its fingerprint on the recursion coefficients: the
//! decay rates Im(a_n) grow linearly with the chain position before
//! saturating, |a_n| ~ eta * n + k, and the slope eta is itself linear in
//! both dissipation strengths, eta = c1 * alpha + c2 * gamma.  This module
//! fits those laws: a least-squares line over an automatically detected
//! pre-plateau window for eta, and a two-parameter plane through the
//! origin for the (alpha, gamma) dependence.
//!
//! The hopping amplitudes b_n of chaotic chains carry strong step-to-step
//! scatter plus occasional near-breakdown spikes; a binomial-weighted
//! descent smoother and a running-median outlier filter condition them for
//! plotting and fitting without disturbing index alignment (spikes are
//! replaced, never deleted, so the sequence still drives the chain ODE).
//!
//! Operator growth in real space is tracked by decomposing Krylov basis
//! elements in the Pauli-string basis and grouping squared coefficient
//! mass by support size.  A finite chain has a wall at support N: the
//! step n1 where weight at size N first appears, and the step n2 where
//! size N becomes the dominant class, bracket the finite-size crossover
//! of the coefficient sequences.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::liouville::{devectorize, SuperVector};
use crate::spin_algebra::{pauli_decompose, BasisTag, SpinOperator};

/// Least-squares line through |a_n| over a fit window.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    /// Slope of |a_n| vs n (dimensionless per iteration).
    pub eta: f64,
    /// Intercept.
    pub k: f64,
    /// Slope of the constrained fit with k pinned to zero.
    pub eta_zero_offset: f64,
    /// Half-open index interval the line was fit over.
    pub fit_range: (usize, usize),
    /// Coefficient of determination on the window.
    pub r_squared: f64,
}

/// Linear response of the slope to the two dissipation strengths,
/// eta = c1 * alpha + c2 * gamma.
#[derive(Debug, Clone, Serialize)]
pub struct EtaModel {
    pub c1: f64,
    pub c2: f64,
    /// Root-mean-square misfit over the input points.
    pub residual: f64,
}

/// Squared Pauli-coefficient mass grouped by support size 0..=N.
#[derive(Debug, Clone, Serialize)]
pub struct SupportProfile {
    pub weights: Vec<f64>,
}

/// Wall-hitting steps: first contact and full saturation of the largest
/// support class.  Absent when the run never reaches the wall.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WallSteps {
    pub n1: Option<usize>,
    pub n2: Option<usize>,
}

/// Fit window selection for [`fit_diagonal_slope`].
#[derive(Debug, Clone, Copy)]
pub enum FitRange {
    /// From n = 0 to the detected plateau onset.
    Auto,
    /// Explicit half-open interval.
    Explicit(usize, usize),
}

/// Default threshold for first wall contact.
pub const WALL_THRESHOLD: f64 = 1e-10;

/// Default descent-smoothing window.
pub const DEFAULT_SMOOTH_WINDOW: usize = 51;

/// Relative growth per window below which the trailing average counts as
/// flat.
const PLATEAU_GROWTH: f64 = 0.01;

/// Detects the plateau onset of a growing-then-saturating sequence: the
/// first index where the trailing moving average grows by less than 1% of
/// itself over one window.
fn plateau_onset(seq: &[f64]) -> usize {
    let len = seq.len();
    let w = (len / 100).max(10).min(len);
    let mut trailing = Vec::with_capacity(len);
    let mut acc = 0.0;
    for (i, &v) in seq.iter().enumerate() {
        acc += v;
        if i >= w {
            acc -= seq[i - w];
        }
        trailing.push(acc / (i + 1).min(w) as f64);
    }
    for i in 2 * w..len {
        let prev = trailing[i - w];
        let growth = trailing[i] - prev;
        if growth < PLATEAU_GROWTH * prev.abs().max(f64::MIN_POSITIVE) {
            return i;
        }
    }
    len
}

fn line_fit(seq: &[f64], start: usize, end: usize) -> (f64, f64, f64, f64) {
    let n = (end - start) as f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &y) in seq[start..end].iter().enumerate() {
        let x = (start + i) as f64;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    let denom = n * sxx - sx * sx;
    let eta = (n * sxy - sx * sy) / denom;
    let k = (sy - eta * sx) / n;
    let eta0 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss_tot = syy - sy * sy / n;
    let mut ss_res = 0.0;
    for (i, &y) in seq[start..end].iter().enumerate() {
        let x = (start + i) as f64;
        let r = y - eta * x - k;
        ss_res += r * r;
    }
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (eta, k, eta0, r_squared)
}

/// Fits |a_n| ~ eta * n + k over the initial growth window.
pub fn fit_diagonal_slope(abs_a: &[f64], range: FitRange) -> Result<SlopeFit> {
    if abs_a.len() < 10 {
        return Err(Error::DegenerateRange {
            start: 0,
            end: abs_a.len(),
        });
    }
    let (start, end) = match range {
        FitRange::Auto => (0, plateau_onset(abs_a)),
        FitRange::Explicit(s, e) => (s, e.min(abs_a.len())),
    };
    if end <= start + 1 || end > abs_a.len() {
        return Err(Error::DegenerateRange { start, end });
    }
    let (eta, k, eta_zero_offset, r_squared) = line_fit(abs_a, start, end);
    Ok(SlopeFit {
        eta,
        k,
        eta_zero_offset,
        fit_range: (start, end),
        r_squared,
    })
}

/// Fits eta = c1 * alpha + c2 * gamma by least squares (no offset) over
/// (alpha, gamma, eta) points.
pub fn fit_eta_model(points: &[(f64, f64, f64)]) -> Result<EtaModel> {
    if points.len() < 3 {
        return Err(Error::RankDeficient);
    }
    let (mut saa, mut sag, mut sgg, mut sae, mut sge) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(a, g, e) in points {
        saa += a * a;
        sag += a * g;
        sgg += g * g;
        sae += a * e;
        sge += g * e;
    }
    let det = saa * sgg - sag * sag;
    let scale = (saa.max(sgg)).max(f64::MIN_POSITIVE);
    // Collinear (alpha, gamma) designs cannot separate c1 from c2, except
    // in the pure single-axis cases where the missing column is zero and
    // its coefficient is simply reported as 0.
    if det <= 1e-12 * scale * scale {
        if sgg <= 1e-30 * scale && saa > 0.0 {
            let c1 = sae / saa;
            return Ok(EtaModel {
                c1,
                c2: 0.0,
                residual: rms_residual(points, c1, 0.0),
            });
        }
        if saa <= 1e-30 * scale && sgg > 0.0 {
            let c2 = sge / sgg;
            return Ok(EtaModel {
                c1: 0.0,
                c2,
                residual: rms_residual(points, 0.0, c2),
            });
        }
        return Err(Error::RankDeficient);
    }
    let c1 = (sgg * sae - sag * sge) / det;
    let c2 = (saa * sge - sag * sae) / det;
    Ok(EtaModel {
        c1,
        c2,
        residual: rms_residual(points, c1, c2),
    })
}

fn rms_residual(points: &[(f64, f64, f64)], c1: f64, c2: f64) -> f64 {
    let ss: f64 = points
        .iter()
        .map(|&(a, g, e)| {
            let r = e - c1 * a - c2 * g;
            r * r
        })
        .sum();
    (ss / points.len() as f64).sqrt()
}

/// Centered binomial-weighted smoothing with windows shrinking toward the
/// edges.  Binomial weights annihilate alternating +-1 noise exactly at
/// every odd window, which a flat average does not.
pub fn smooth_descent(b: &[f64], window: usize) -> Vec<f64> {
    assert!(window % 2 == 1 && window <= b.len().max(1), "window must be odd and fit");
    let len = b.len();
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let half = ((window - 1) / 2).min(i).min(len - 1 - i);
        if half == 0 {
            out.push(b[i]);
            continue;
        }
        // Row 2*half of Pascal's triangle, normalized.
        let mut weight = 1.0f64;
        let mut num = 0.0;
        let mut den = 0.0;
        let m = 2 * half;
        for (j, &v) in b[i - half..=i + half].iter().enumerate() {
            num += weight * v;
            den += weight;
            weight = weight * (m - j) as f64 / (j + 1) as f64;
        }
        out.push(num / den);
    }
    out
}

/// Replaces values exceeding `multiplier` times the running median (window
/// 101, clamped at the edges) by that median, iterating to a fixed point so
/// a second application is a no-op.  Returns the filtered sequence and the
/// indices replaced on any pass.
pub fn filter_outliers(b: &[f64], multiplier: f64) -> (Vec<f64>, Vec<usize>) {
    assert!(multiplier > 1.0);
    let len = b.len();
    let mut seq = b.to_vec();
    let mut removed = Vec::new();
    let window = 101.min(len.max(1));
    let half = window / 2;
    loop {
        let mut changed = false;
        let mut next = seq.clone();
        for i in 0..len {
            let lo = i.saturating_sub(half).min(len.saturating_sub(window));
            let hi = (lo + window).min(len);
            let mut w: Vec<f64> = seq[lo..hi].to_vec();
            w.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = w[w.len() / 2];
            if seq[i] > multiplier * median {
                next[i] = median;
                if !removed.contains(&i) {
                    removed.push(i);
                }
                changed = true;
            }
        }
        seq = next;
        if !changed {
            break;
        }
    }
    removed.sort_unstable();
    (seq, removed)
}

/// Decomposes a full-space supervector in the Pauli-string basis and groups
/// squared coefficient mass by support size.
pub fn support_profile(v: &SuperVector, n_sites: usize) -> Result<SupportProfile> {
    let mat = devectorize(v)?;
    let dim = 1usize << n_sites;
    if mat.nrows() != dim {
        return Err(Error::SectoredSupport {
            expected: dim,
            got: mat.nrows(),
        });
    }
    let op = SpinOperator::from_mat(mat, BasisTag::FullSpace { n_sites });
    let strings = pauli_decompose(&op, n_sites, 0.0)?;
    let mut weights = vec![0.0f64; n_sites + 1];
    for s in &strings {
        weights[s.support_size()] += s.coefficient.norm_sqr();
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::SeedAnnihilated);
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(SupportProfile { weights })
}

/// Scans consecutive basis-element profiles for the wall: n1 = first step
/// with any weight at the maximal support size, n2 = first step where that
/// size is the dominant class.
pub fn detect_wall_steps(profiles: &[SupportProfile], threshold: f64) -> WallSteps {
    let mut n1 = None;
    let mut n2 = None;
    for (i, p) in profiles.iter().enumerate() {
        let w_max = match p.weights.last() {
            Some(&w) => w,
            None => continue,
        };
        if n1.is_none() && w_max > threshold {
            n1 = Some(i);
        }
        let dominant = p
            .weights
            .iter()
            .take(p.weights.len() - 1)
            .all(|&w| w <= w_max);
        if n2.is_none() && dominant && w_max > threshold {
            n2 = Some(i);
        }
        if n1.is_some() && n2.is_some() {
            break;
        }
    }
    WallSteps { n1, n2 }
}
