//! Compare empirical measures with the energy and Gaussian kernels and take
//! one gradient step that moves a measure toward another.

use measure_recon::metrics::{mmd_grad_second, mmd_squared, KernelSpec};
use measure_recon::partition::EmpiricalMeasure;
use measure_recon::Result;
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn gaussian_cloud(n: usize, shift: f64, seed: u64) -> Result<EmpiricalMeasure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(shift, 1.0).unwrap();
    EmpiricalMeasure::new(Array2::from_shape_simple_fn((n, 2), || normal.sample(&mut rng)))
}

pub fn run_example() -> Result<Vec<(f64, f64)>> {
    let reference = gaussian_cloud(200, 0.0, 1)?;
    let kernels = [KernelSpec::Energy, KernelSpec::gaussian(1.0)?];
    let mut rows = Vec::new();
    for shift in [0.0, 0.5, 1.0, 2.0] {
        let other = gaussian_cloud(200, shift, 2)?;
        let e = mmd_squared(kernels[0], &reference, &other)?;
        let g = mmd_squared(kernels[1], &reference, &other)?;
        println!("shift {shift:3.1}: energy {e:.4}  gaussian {g:.4}");
        rows.push((e, g));
    }

    let mut moving = gaussian_cloud(200, 2.0, 3)?.into_samples();
    for step in 0..5 {
        let current = EmpiricalMeasure::new(moving.clone())?;
        let loss = mmd_squared(KernelSpec::Energy, &reference, &current)?;
        println!("descent step {step}: energy MMD² {loss:.4}");
        let grad = mmd_grad_second(KernelSpec::Energy, &reference, &current)?;
        moving.scaled_add(-100.0, &grad);
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
