//! Pick a delay from the first minimum of the mutual information and a
//! dimension from Cao's E1 plateau, then embed the observable.

use measure_recon::dynamics::{simulate, OdeSystem};
use measure_recon::embedding::{
    average_mutual_information, cao_curves_with, delay_embed, select_dim, select_tau, DelayConfig,
    DEFAULT_AMI_BINS,
};
use measure_recon::Result;

pub fn run_example() -> Result<(usize, usize)> {
    let lorenz = OdeSystem::lorenz();
    let traj = simulate(&lorenz, &[1.0, 1.0, 1.0], 0.01, 5_000, 30_000)?;
    let x = traj.component(0);

    let ami = average_mutual_information(x, 60, DEFAULT_AMI_BINS)?;
    let tau = select_tau(&ami);
    println!("mutual information first minimum: {} steps ({:.2} s)", tau.tau_steps, tau.tau_steps as f64 * 0.01);

    let cao = cao_curves_with(x, tau.tau_steps, 8, 1000)?;
    for (d, (e1, e2)) in cao.e1.iter().zip(&cao.e2).enumerate() {
        println!("  d = {}: E1 = {e1:.3}, E2 = {e2:.3}", d + 1);
    }
    let dim = select_dim(&cao.e1, 0.95);
    println!("embedding dimension: {}", dim.m);

    let embedded = delay_embed(x, DelayConfig::new(tau.tau_steps, dim.m))?;
    println!("{} delay vectors of width {}", embedded.len(), embedded.width());
    Ok((tau.tau_steps, dim.m))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
