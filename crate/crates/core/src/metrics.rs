//! Discrepancies between empirical measures and the pointwise MSE.
//!
//! MMD² is the biased V-statistic
//!
//! ```text
//! (1/a²) Σ k(x_i, x_j) + (1/b²) Σ k(y_i, y_j) − (2/ab) Σ k(x_i, y_j)
//! ```
//!
//! with either the negative-distance (energy) kernel `−‖x − y‖` or a
//! Gaussian kernel. Sums run in row-major order so results are reproducible.

use std::cmp::Ordering;

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{check_dim, Error, Result};
use crate::partition::EmpiricalMeasure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `k(x, y) = −‖x − y‖₂`
    Energy,
    /// `k(x, y) = exp(−‖x − y‖² / 2σ²)`
    Gaussian { sigma: f64 },
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("Gaussian bandwidth must be positive, got {sigma}")));
        }
        Ok(KernelSpec::Gaussian { sigma })
    }

    #[inline]
    fn at_sq_dist(&self, d2: f64) -> f64 {
        match *self {
            KernelSpec::Energy => -d2.sqrt(),
            KernelSpec::Gaussian { sigma } => (-d2 / (2.0 * sigma * sigma)).exp(),
        }
    }

    /// Scalar `s` with `∂k(x, y)/∂y = s · (x − y)`.
    #[inline]
    fn grad_scale(&self, d2: f64) -> f64 {
        match *self {
            KernelSpec::Energy => {
                if d2 > 0.0 {
                    1.0 / d2.sqrt()
                } else {
                    0.0 // subgradient at coincident points
                }
            }
            KernelSpec::Gaussian { sigma } => {
                let s2 = sigma * sigma;
                (-d2 / (2.0 * s2)).exp() / s2
            }
        }
    }
}

impl std::fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelSpec::Energy => write!(f, "energy"),
            KernelSpec::Gaussian { sigma } => write!(f, "gaussian(sigma={sigma})"),
        }
    }
}

#[inline]
fn sq_dist(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn kernel_eval(spec: KernelSpec, x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> Result<f64> {
    check_dim("kernel arguments", x.len(), y.len())?;
    Ok(spec.at_sq_dist(sq_dist(x, y)))
}

fn kernel_sum(spec: KernelSpec, x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    let mut total = 0.0;
    for xi in x.rows() {
        for yj in y.rows() {
            total += spec.at_sq_dist(sq_dist(xi, yj));
        }
    }
    total
}

/// Total order on sample matrices so the cross term is summed the same way
/// whichever argument comes first.
fn canonical_order(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Ordering {
    a.nrows()
        .cmp(&b.nrows())
        .then_with(|| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

/// MMD² between two sample sets given as matrices (rows = atoms).
pub fn mmd_squared_samples(spec: KernelSpec, x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Result<f64> {
    if x.nrows() == 0 || y.nrows() == 0 {
        return Err(Error::invalid("MMD of an empty measure"));
    }
    check_dim("MMD ambient dimension", x.ncols(), y.ncols())?;
    let (a, b) = (x.nrows() as f64, y.nrows() as f64);
    let xx = kernel_sum(spec, x, x) / (a * a);
    let yy = kernel_sum(spec, y, y) / (b * b);
    let xy = match canonical_order(x, y) {
        Ordering::Greater => kernel_sum(spec, y, x),
        _ => kernel_sum(spec, x, y),
    } / (a * b);
    let value = (xx + yy) - 2.0 * xy;
    let tol = 1e-10 * (1.0f64).max(xx.abs() + yy.abs());
    Ok(if value < 0.0 && value >= -tol { 0.0 } else { value })
}

pub fn mmd_squared(spec: KernelSpec, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    mmd_squared_samples(spec, mu.samples(), nu.samples())
}

/// Gradient of [`mmd_squared_samples`] with respect to every row of `y`.
pub fn mmd_grad_second_samples(
    spec: KernelSpec,
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    if x.nrows() == 0 || y.nrows() == 0 {
        return Err(Error::invalid("MMD of an empty measure"));
    }
    check_dim("MMD ambient dimension", x.ncols(), y.ncols())?;
    let (a, b) = (x.nrows() as f64, y.nrows() as f64);
    let d = y.ncols();
    let self_w = 2.0 / (b * b);
    let cross_w = 2.0 / (a * b);
    let mut grad = Array2::zeros(y.dim());
    let mut acc = vec![0.0; d];
    for (j, yj) in y.rows().into_iter().enumerate() {
        acc.iter_mut().for_each(|v| *v = 0.0);
        // d/dy_j of (1/b²) ΣΣ k(y_i, y_l): both argument slots contribute
        for yl in y.rows() {
            let s = self_w * spec.grad_scale(sq_dist(yl, yj));
            for k in 0..d {
                acc[k] += s * (yl[k] - yj[k]);
            }
        }
        for xi in x.rows() {
            let s = cross_w * spec.grad_scale(sq_dist(xi, yj));
            for k in 0..d {
                acc[k] -= s * (xi[k] - yj[k]);
            }
        }
        for k in 0..d {
            grad[[j, k]] = acc[k];
        }
    }
    Ok(grad)
}

pub fn mmd_grad_second(spec: KernelSpec, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<Array2<f64>> {
    mmd_grad_second_samples(spec, mu.samples(), nu.samples())
}

/// MMD² and its gradient with respect to `y` in one pass over the kernel
/// matrix. Unlike [`mmd_squared_samples`] the cross term is always summed
/// with `y` in the inner loop and no clamping is applied.
pub fn mmd_value_and_grad_samples(
    spec: KernelSpec,
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
) -> Result<(f64, Array2<f64>)> {
    if x.nrows() == 0 || y.nrows() == 0 {
        return Err(Error::invalid("MMD of an empty measure"));
    }
    check_dim("MMD ambient dimension", x.ncols(), y.ncols())?;
    let (a, b) = (x.nrows() as f64, y.nrows() as f64);
    let d = y.ncols();
    let self_w = 2.0 / (b * b);
    let cross_w = 2.0 / (a * b);
    let mut grad = Array2::zeros(y.dim());
    let (mut yy, mut xy) = (0.0, 0.0);
    let mut acc = vec![0.0; d];
    for (j, yj) in y.rows().into_iter().enumerate() {
        acc.iter_mut().for_each(|v| *v = 0.0);
        for yl in y.rows() {
            let d2 = sq_dist(yl, yj);
            yy += spec.at_sq_dist(d2);
            let s = self_w * spec.grad_scale(d2);
            for k in 0..d {
                acc[k] += s * (yl[k] - yj[k]);
            }
        }
        for xi in x.rows() {
            let d2 = sq_dist(xi, yj);
            xy += spec.at_sq_dist(d2);
            let s = cross_w * spec.grad_scale(d2);
            for k in 0..d {
                acc[k] -= s * (xi[k] - yj[k]);
            }
        }
        for k in 0..d {
            grad[[j, k]] = acc[k];
        }
    }
    let xx = kernel_sum(spec, x, x) / (a * a);
    Ok((xx + yy / (b * b) - 2.0 * xy / (a * b), grad))
}

/// Mean over rows of the squared Euclidean row difference.
pub fn mse(pred: ArrayView2<'_, f64>, target: ArrayView2<'_, f64>) -> Result<f64> {
    check_dim("mse rows", target.nrows(), pred.nrows())?;
    check_dim("mse cols", target.ncols(), pred.ncols())?;
    if pred.nrows() == 0 {
        return Err(Error::invalid("mse of an empty batch"));
    }
    let total: f64 = pred
        .iter()
        .zip(target.iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(total / pred.nrows() as f64)
}
