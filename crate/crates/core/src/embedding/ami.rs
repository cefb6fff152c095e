use ndarray::ArrayView1;

use crate::error::{Error, Result};

pub const DEFAULT_AMI_BINS: usize = 32;

/// Histogram estimate of the mutual information between `s[t]` and
/// `s[t + lag]` for `lag = 1..=max_lag` (natural log, equal-width bins
/// spanning the range of the whole series).
pub fn average_mutual_information(
    series: ArrayView1<'_, f64>,
    max_lag: usize,
    n_bins: usize,
) -> Result<Vec<f64>> {
    if n_bins < 2 {
        return Err(Error::invalid("AMI needs at least 2 bins"));
    }
    if max_lag == 0 {
        return Err(Error::invalid("max_lag must be at least 1"));
    }
    let n = series.len();
    if n <= max_lag + 1 {
        return Err(Error::SeriesTooShort {
            min: max_lag + 2,
            len: n,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "in AMI input series".into(),
        });
    }
    let lo = series.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::Degenerate("series has zero range".into()));
    }
    let width = (hi - lo) / n_bins as f64;
    let bins: Vec<usize> = series
        .iter()
        .map(|&v| (((v - lo) / width) as usize).min(n_bins - 1))
        .collect();

    let mut joint = vec![0usize; n_bins * n_bins];
    let mut curve = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        joint.iter_mut().for_each(|c| *c = 0);
        let pairs = n - lag;
        for t in 0..pairs {
            joint[bins[t] * n_bins + bins[t + lag]] += 1;
        }
        curve.push(mutual_information(&joint, n_bins, pairs));
    }
    Ok(curve)
}

fn mutual_information(joint: &[usize], n_bins: usize, total: usize) -> f64 {
    let mut row = vec![0usize; n_bins];
    let mut col = vec![0usize; n_bins];
    for i in 0..n_bins {
        for j in 0..n_bins {
            let c = joint[i * n_bins + j];
            row[i] += c;
            col[j] += c;
        }
    }
    let total = total as f64;
    let mut mi = 0.0;
    for i in 0..n_bins {
        for j in 0..n_bins {
            let c = joint[i * n_bins + j];
            if c == 0 {
                continue;
            }
            // p_ij / (p_i p_j) = c * N / (r_i * c_j)
            let ratio = c as f64 * total / (row[i] as f64 * col[j] as f64);
            mi += c as f64 / total * ratio.ln();
        }
    }
    mi
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TauSelection {
    pub tau_steps: usize,
    /// No interior local minimum existed; `tau_steps` is the global argmin.
    pub fallback: bool,
}

/// First local minimum of an AMI curve whose entry `i` is lag `i + 1`.
pub fn select_tau(curve: &[f64]) -> TauSelection {
    for lag in 2..curve.len() {
        let (prev, here, next) = (curve[lag - 2], curve[lag - 1], curve[lag]);
        if here < prev && here <= next {
            return TauSelection {
                tau_steps: lag,
                fallback: false,
            };
        }
    }
    let mut best = 0;
    for (i, v) in curve.iter().enumerate() {
        if *v < curve[best] {
            best = i;
        }
    }
    log::warn!("AMI curve has no interior minimum, falling back to argmin lag {}", best + 1);
    TauSelection {
        tau_steps: best + 1,
        fallback: true,
    }
}
