//! Integrate the three benchmark systems, add measurement noise and print
//! per-coordinate ranges.

use measure_recon::dynamics::{add_gaussian_noise, simulate, OdeSystem, Trajectory};
use measure_recon::Result;

fn ranges(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.states
        .columns()
        .into_iter()
        .map(|c| {
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .collect()
}

/// `(min, max)` of each coordinate.
pub type Ranges = Vec<(f64, f64)>;

pub fn run_example() -> Result<Vec<(String, Ranges)>> {
    let mut out = Vec::new();
    for (system, variance) in [
        (OdeSystem::lorenz(), 0.1),
        (OdeSystem::rossler(), 0.1),
        (OdeSystem::lotka_volterra(), 5e-5),
    ] {
        let x0 = system.default_initial_state();
        let clean = simulate(&system, &x0, system.default_dt(), 5_000, 20_000)?;
        let noisy = add_gaussian_noise(&clean, &vec![variance; clean.dim()], 7)?;
        println!("{} (dt = {})", system.name(), system.default_dt());
        for (i, ((lo, hi), (nlo, nhi))) in ranges(&clean).into_iter().zip(ranges(&noisy)).enumerate() {
            println!("  x{i}: clean [{lo:9.4}, {hi:9.4}]  noisy [{nlo:9.4}, {nhi:9.4}]");
        }
        out.push((system.name().to_string(), ranges(&clean)));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
