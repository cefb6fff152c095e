//! Reduce a synthetic space-time field with POD and check that the
//! truncation error is the discarded variance.

use measure_recon::pod::{pod_basis, pod_project, pod_reconstruct};
use measure_recon::Result;
use ndarray::Array2;

/// Rows of `(modes, reconstruction error, discarded variance, total variance)`.
pub fn run_example() -> Result<Vec<(usize, f64, f64, f64)>> {
    let (t, d) = (200, 1000);
    // travelling waves with decaying amplitudes
    let field = Array2::from_shape_fn((t, d), |(i, j)| {
        let x = j as f64 / d as f64 * std::f64::consts::TAU;
        let s = i as f64 * 0.07;
        (1..=12)
            .map(|k| {
                let k = k as f64;
                (k * x - s * k.sqrt()).sin() / k + 0.5 * (k * x + 1.3 * s).cos() / (k * k)
            })
            .sum::<f64>()
            + 2.0
    });
    let mut rows = Vec::new();
    for n in [2, 5, 10, 20] {
        let basis = pod_basis(field.view(), n)?;
        let coeffs = pod_project(&basis, field.view())?;
        let back = pod_reconstruct(&basis, coeffs.view())?;
        let err: f64 = (&back - &field).iter().map(|v| v * v).sum::<f64>() / t as f64;
        let discarded = basis.total_energy - basis.eigenvalues.sum();
        println!(
            "{n:2} modes: captured {:.6}, mean squared error {err:.3e}, discarded variance {discarded:.3e}",
            basis.captured_fraction()
        );
        rows.push((n, err, discarded, basis.total_energy));
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
