//! Partition delay vectors into equal-size cells and pair each cell with the
//! full states it came from.

use measure_recon::dynamics::{simulate, OdeSystem};
use measure_recon::embedding::{delay_embed, DelayConfig};
use measure_recon::partition::{build_measure_pairs, constrained_kmeans, MeasurePair};
use measure_recon::Result;
use ndarray::Axis;

pub fn run_example() -> Result<Vec<MeasurePair>> {
    let traj = simulate(&OdeSystem::lorenz(), &[1.0, 1.0, 1.0], 0.01, 5_000, 20_000)?;
    let delay = delay_embed(traj.component(0), DelayConfig::new(18, 4))?;
    let rows: Vec<usize> = (0..delay.len()).step_by(10).collect();
    let inputs = delay.data.select(Axis(0), &rows);
    let sources: Vec<usize> = rows.iter().map(|&r| delay.source_index(r)).collect();
    let targets = traj.states.select(Axis(0), &sources);

    let km = constrained_kmeans(inputs.view(), 20, 1, 100)?;
    println!("{} points, {} cells, {} iterations", inputs.nrows(), km.centers.nrows(), km.iterations);
    println!(
        "SSE {:.1} -> {:.1}",
        km.sse_history.first().unwrap(),
        km.sse_history.last().unwrap()
    );
    let pairs = build_measure_pairs(targets.view(), inputs.view(), &km.labels)?;
    for p in pairs.iter().take(5) {
        let mean = p.full.mean();
        println!(
            "cell {:2}: {} samples, full-state mean ({:6.2}, {:6.2}, {:6.2})",
            p.cell_id,
            p.full.len(),
            mean[0],
            mean[1],
            mean[2]
        );
    }
    Ok(pairs)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
