//! Proper orthogonal decomposition by the method of snapshots.
//!
//! Snapshots are rows of a `T × D` matrix. After removing the temporal mean,
//! the `T × T` correlation matrix `C = X Xᵀ / T` is diagonalised and each
//! spatial mode is recovered as `Xᵀ u / ‖Xᵀ u‖`.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{check_dim, Error, Result};
use crate::linalg::symmetric_eigen;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PodBasis {
    pub mean: Array1<f64>,
    /// `D × n_pod`, orthonormal columns.
    pub modes: Array2<f64>,
    /// Retained eigenvalues of the correlation matrix, descending.
    pub eigenvalues: Array1<f64>,
    /// Trace of the correlation matrix, i.e. the total variance.
    pub total_energy: f64,
}

impl PodBasis {
    pub fn n_modes(&self) -> usize {
        self.modes.ncols()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Fraction of the variance captured by the retained modes.
    pub fn captured_fraction(&self) -> f64 {
        if self.total_energy > 0.0 {
            self.eigenvalues.sum() / self.total_energy
        } else {
            1.0
        }
    }
}

pub fn temporal_mean(snapshots: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    snapshots
        .mean_axis(Axis(0))
        .ok_or_else(|| Error::invalid("temporal mean of an empty snapshot matrix"))
}

pub fn pod_basis(snapshots: ArrayView2<'_, f64>, n_pod: usize) -> Result<PodBasis> {
    let (t, d) = snapshots.dim();
    if n_pod == 0 || n_pod > t.min(d) {
        return Err(Error::invalid(format!(
            "n_pod must be in 1..={} for a {t} x {d} snapshot matrix",
            t.min(d)
        )));
    }
    let mean = temporal_mean(snapshots)?;
    let centered = &snapshots - &mean;
    let corr = centered.dot(&centered.t()) / t as f64;
    let total_energy = corr.diag().sum();
    let (values, vectors) = symmetric_eigen(&corr)?;
    let lambda_max = values[0].max(0.0);

    let mut modes = Array2::zeros((d, n_pod));
    for k in 0..n_pod {
        let lambda = values[k];
        if !(lambda > RANK_TOLERANCE * lambda_max) || lambda_max == 0.0 {
            return Err(Error::RankDeficient {
                requested: n_pod,
                index: k,
                value: lambda,
                max: lambda_max,
            });
        }
        let mut mode = centered.t().dot(&vectors.column(k));
        let norm = mode.dot(&mode).sqrt();
        mode /= norm;
        fix_sign(&mut mode);
        modes.column_mut(k).assign(&mode);
    }
    // re-orthonormalise against round-off from the eigenvectors
    gram_schmidt(&mut modes);
    Ok(PodBasis {
        mean,
        modes,
        eigenvalues: values.slice(ndarray::s![..n_pod]).to_owned(),
        total_energy,
    })
}

/// Largest-magnitude entry made positive; lowest index wins ties.
fn fix_sign(mode: &mut Array1<f64>) {
    let mut best = 0;
    for (i, v) in mode.iter().enumerate() {
        if v.abs() > mode[best].abs() {
            best = i;
        }
    }
    if mode[best] < 0.0 {
        mode.mapv_inplace(|v| -v);
    }
}

fn gram_schmidt(modes: &mut Array2<f64>) {
    for k in 0..modes.ncols() {
        for j in 0..k {
            let proj = modes.column(k).dot(&modes.column(j));
            let prev = modes.column(j).to_owned();
            modes.column_mut(k).scaled_add(-proj, &prev);
        }
        let norm = modes.column(k).dot(&modes.column(k)).sqrt();
        modes.column_mut(k).mapv_inplace(|v| v / norm);
    }
}

/// Coefficients `α_k(t) = ⟨z(t) − z̄, m_k⟩`, one row per snapshot.
pub fn pod_project(basis: &PodBasis, snapshots: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_dim("POD projection width", basis.dim(), snapshots.ncols())?;
    Ok((&snapshots - &basis.mean).dot(&basis.modes))
}

/// Snapshots `z̄ + Σ_k α_k m_k` from coefficient rows.
pub fn pod_reconstruct(basis: &PodBasis, coeffs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_dim("POD coefficient count", basis.n_modes(), coeffs.ncols())?;
    Ok(coeffs.dot(&basis.modes.t()) + &basis.mean)
}
