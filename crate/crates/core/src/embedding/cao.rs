//! Cao's method for the minimum embedding dimension.
//!
//! For each dimension `d`, every reference point's nearest neighbour is found
//! in the `d`-dimensional delay space (max norm). `E(d)` averages how much the
//! neighbour distance grows when one more delay coordinate is appended and
//! `E1(d) = E(d+1) / E(d)` saturates near 1 once the attractor is unfolded.
//! `E2` is the same ratio built from the appended coordinate alone and stays
//! near 1 for stochastic data.

use ndarray::ArrayView1;

use crate::error::{Error, Result};

/// Reference points used for the statistic unless overridden.
pub const DEFAULT_CAO_POINTS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct CaoCurves {
    /// `e1[d - 1]` is `E1(d)` for `d = 1..=max_dim`.
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
}

pub fn cao_curves(series: ArrayView1<'_, f64>, tau_steps: usize, max_dim: usize) -> Result<CaoCurves> {
    cao_curves_with(series, tau_steps, max_dim, DEFAULT_CAO_POINTS)
}

/// As [`cao_curves`] with an explicit cap on the number of reference points.
/// Reference points are evenly strided; neighbours are searched among all
/// delay vectors.
pub fn cao_curves_with(
    series: ArrayView1<'_, f64>,
    tau_steps: usize,
    max_dim: usize,
    max_points: usize,
) -> Result<CaoCurves> {
    if tau_steps == 0 || max_dim == 0 || max_points == 0 {
        return Err(Error::invalid("tau_steps, max_dim and max_points must be positive"));
    }
    let s: Vec<f64> = series.to_vec();
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "in Cao input series".into(),
        });
    }
    // E(d) for d = 1..=max_dim+1 needs delay vectors of length max_dim + 2.
    let span = (max_dim + 1) * tau_steps;
    let n = s.len();
    if n <= span + 1 {
        return Err(Error::SeriesTooShort { min: span + 2, len: n });
    }
    let n_vec = n - span;
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // neighbours closer than this are treated as duplicates of the reference
    let dup_tol = 1e-9 * (hi - lo).max(f64::MIN_POSITIVE);

    let n_ref = n_vec.min(max_points);
    let refs: Vec<usize> = (0..n_ref).map(|k| k * n_vec / n_ref).collect();

    let mut e = Vec::with_capacity(max_dim + 1);
    let mut e_star = Vec::with_capacity(max_dim + 1);
    for d in 1..=max_dim + 1 {
        let mut sum_a = 0.0;
        let mut sum_star = 0.0;
        let mut used = 0usize;
        for &i in &refs {
            let Some((j, dist)) = nearest_neighbor(&s, i, n_vec, d, tau_steps, dup_tol) else {
                continue;
            };
            let extra = (s[i + d * tau_steps] - s[j + d * tau_steps]).abs();
            sum_a += dist.max(extra) / dist;
            sum_star += extra;
            used += 1;
        }
        if used == 0 {
            return Err(Error::Degenerate(format!(
                "every reference point has only duplicate neighbours at dimension {d}"
            )));
        }
        e.push(sum_a / used as f64);
        e_star.push(sum_star / used as f64);
    }

    let ratio = |v: &[f64], d: usize| {
        if v[d - 1] > 0.0 {
            v[d] / v[d - 1]
        } else {
            1.0
        }
    };
    let e1 = (1..=max_dim).map(|d| ratio(&e, d)).collect();
    let e2 = (1..=max_dim).map(|d| ratio(&e_star, d)).collect();
    Ok(CaoCurves { e1, e2 })
}

/// Nearest neighbour of delay vector `i` in dimension `d` (max norm),
/// skipping itself and anything within `dup_tol`. Lowest index wins ties.
fn nearest_neighbor(
    s: &[f64],
    i: usize,
    n_vec: usize,
    d: usize,
    tau: usize,
    dup_tol: f64,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..n_vec {
        if j == i {
            continue;
        }
        let bound = best.map_or(f64::INFINITY, |(_, b)| b);
        let mut dist = 0.0f64;
        for k in 0..d {
            dist = dist.max((s[i + k * tau] - s[j + k * tau]).abs());
            if dist >= bound {
                break;
            }
        }
        if dist > dup_tol && dist < bound {
            best = Some((j, dist));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimSelection {
    pub m: usize,
    /// No sustained crossing existed; `m` is the argmax of `E1`.
    pub fallback: bool,
}

/// Smallest `d` from which `E1` stays at or above `threshold`.
pub fn select_dim(e1: &[f64], threshold: f64) -> DimSelection {
    let mut candidate = None;
    for (i, &v) in e1.iter().enumerate().rev() {
        if v >= threshold {
            candidate = Some(i + 1);
        } else {
            break;
        }
    }
    if let Some(m) = candidate {
        return DimSelection { m, fallback: false };
    }
    let mut best = 0;
    for (i, &v) in e1.iter().enumerate() {
        if v > e1[best] {
            best = i;
        }
    }
    log::warn!("E1 never settles above {threshold}, falling back to argmax d = {}", best + 1);
    DimSelection {
        m: best + 1,
        fallback: true,
    }
}
