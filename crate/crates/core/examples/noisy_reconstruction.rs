//! Small noisy-Lorenz experiment: train the pointwise and the measure loss
//! from the same initial network and compare clean test errors.
//!
//! Pass a step count to run longer, e.g. `cargo run --release --example
//! noisy_reconstruction -- 10000`.

use measure_recon::harness::config::{ExperimentConfig, SystemKind};
use measure_recon::harness::experiment::{execute, prepare_data};
use measure_recon::Result;

pub fn run_example_with(steps: usize) -> Result<Vec<(String, f64)>> {
    let mut cfg = ExperimentConfig::preset(SystemKind::Lorenz);
    cfg.steps = steps;
    cfg.n_pool = 20_000;
    cfg.n_test = 2_000;
    cfg.hidden = vec![32, 32];
    cfg.seed = 1;
    let data = prepare_data(&cfg)?;
    println!(
        "{} noisy training pairs in {} cells, {} clean test points",
        data.train_inputs.nrows(),
        data.pairs.len(),
        data.test_targets.nrows()
    );
    let (_, outcomes) = execute(&cfg, &data)?;
    let mut out = Vec::new();
    for o in outcomes {
        println!(
            "{:9}: train loss {:.4} -> {:.4}, clean test MSE {:.4}",
            o.loss.to_string(),
            o.history.first().copied().unwrap_or(f64::NAN),
            o.history.last().copied().unwrap_or(f64::NAN),
            o.test_mse
        );
        out.push((o.loss.to_string(), o.test_mse));
    }
    Ok(out)
}

pub fn run_example() -> Result<Vec<(String, f64)>> {
    run_example_with(300)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let steps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    run_example_with(steps).map(|_| ())
}
