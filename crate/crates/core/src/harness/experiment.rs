//! End-to-end noisy reconstruction experiment.
//!
//! simulate (or load) → add noise → delay-embed the observable → draw
//! training pairs → balanced k-means → measure pairs → train both losses from
//! one initialisation → evaluate on a clean held-out segment.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::{s, Array2, Axis};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::config::{DataSource, ExperimentConfig};
use super::csv_io::{load_csv_series, ColumnSelection};
use super::dmat::{encode_dmat, find_section, load_dmat, save_dmat, Section};
use super::report::{emit_report, Report, ReportFormat};
use crate::dynamics::{add_gaussian_noise, simulate, Trajectory};
use crate::embedding::{delay_embed, DelayState};
use crate::error::{Error, Result};
use crate::model::{evaluate_mse, init_mlp, train, LossKind, Mlp, TrainConfig, TrainingData};
use crate::partition::{build_measure_pairs, constrained_kmeans, MeasurePair};

/// Independent streams derived from the experiment seed.
#[derive(Debug, Clone, Copy)]
pub enum SeedStream {
    Noise = 1,
    Sampling = 2,
    Clustering = 3,
    Init = 4,
    Training = 5,
}

/// SplitMix64 mix of the root seed and a stream tag.
pub fn derive_seed(seed: u64, stream: SeedStream) -> u64 {
    let mut z = seed ^ (stream as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Everything the two training runs need, built from one config.
#[derive(Debug, Clone)]
pub struct PreparedData {
    /// Noisy delay vectors of the training pairs.
    pub train_inputs: Array2<f64>,
    /// Noisy full states of the training pairs.
    pub train_targets: Array2<f64>,
    /// Absolute time indices of the training pairs, ascending.
    pub train_indices: Vec<usize>,
    pub labels: Vec<usize>,
    pub pairs: Vec<MeasurePair>,
    pub kmeans_sse: Vec<f64>,
    /// Clean delay vectors of the held-out segment.
    pub test_delay: DelayState,
    pub test_targets: Array2<f64>,
    /// Absolute time indices of the held-out rows.
    pub test_indices: Vec<usize>,
}

fn load_states(path: &Path) -> Result<Array2<f64>> {
    let is_dmat = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("dmat"));
    if is_dmat {
        let sections = load_dmat(path)?;
        Ok(find_section(&sections, "states")?.clone())
    } else {
        load_csv_series(path, &ColumnSelection::All)
    }
}

fn full_trajectory(cfg: &ExperimentConfig, total: usize) -> Result<Trajectory> {
    match &cfg.source {
        DataSource::Simulated { system, x0, n_transient } => {
            simulate(&system.system(), x0, cfg.dt, *n_transient, total)
        }
        DataSource::File { path } => {
            let states = load_states(path)?;
            if states.nrows() < total {
                return Err(Error::invalid(format!(
                    "{} has {} rows, the experiment needs {total}",
                    path.display(),
                    states.nrows()
                )));
            }
            let states = states.slice(s![..total, ..]).to_owned();
            let times = ndarray::Array1::from_iter((0..total).map(|i| i as f64 * cfg.dt));
            Trajectory::new(times, states)
        }
    }
}

pub fn prepare_data(cfg: &ExperimentConfig) -> Result<PreparedData> {
    let delay_cfg = cfg.delay_config()?;
    let window = delay_cfg.window();
    if cfg.n_pool <= window {
        return Err(Error::Config(format!(
            "sim.n_pool = {} is not longer than the delay window {window}",
            cfg.n_pool
        )));
    }
    let total = cfg.n_pool + window + cfg.n_test;
    let traj = full_trajectory(cfg, total)?;
    let dim = traj.dim();
    if cfg.observable >= dim {
        return Err(Error::Config(format!("data.observable {} out of range for {dim} states", cfg.observable)));
    }
    let variances = match cfg.noise_variance.len() {
        1 => vec![cfg.noise_variance[0]; dim],
        n if n == dim => cfg.noise_variance.clone(),
        n => return Err(Error::Config(format!("noise.variance has {n} entries, state has {dim}"))),
    };

    // rows [0, n_pool) are the noisy pool, the rest is the clean test segment
    let pool = traj.slice_rows(0, cfg.n_pool);
    let noisy = add_gaussian_noise(&pool, &variances, derive_seed(cfg.seed, SeedStream::Noise))?;
    let pool_delay = delay_embed(noisy.component(cfg.observable), delay_cfg)?;
    if pool_delay.len() < cfg.n_train {
        return Err(Error::Config(format!(
            "n_train = {} exceeds the {} delay vectors in the pool",
            cfg.n_train,
            pool_delay.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, SeedStream::Sampling));
    let mut rows = index::sample(&mut rng, pool_delay.len(), cfg.n_train).into_vec();
    rows.sort_unstable();
    let train_indices: Vec<usize> = rows.iter().map(|&r| pool_delay.source_index(r)).collect();
    let train_inputs = pool_delay.data.select(Axis(0), &rows);
    let train_targets = noisy.states.select(Axis(0), &train_indices);

    let km = constrained_kmeans(
        train_inputs.view(),
        cfg.cells,
        derive_seed(cfg.seed, SeedStream::Clustering),
        cfg.kmeans_max_iters,
    )?;
    let pairs = build_measure_pairs(train_targets.view(), train_inputs.view(), &km.labels)?;

    let test = traj.slice_rows(cfg.n_pool, total);
    let test_delay = delay_embed(test.component(cfg.observable), delay_cfg)?;
    let test_rows: Vec<usize> = (0..test_delay.len()).map(|r| test_delay.source_index(r)).collect();
    let test_targets = test.states.select(Axis(0), &test_rows);
    let test_indices = test_rows.iter().map(|r| r + cfg.n_pool).collect();

    Ok(PreparedData {
        train_inputs,
        train_targets,
        train_indices,
        labels: km.labels,
        pairs,
        kmeans_sse: km.sse_history,
        test_delay,
        test_targets,
        test_indices,
    })
}

pub fn checkpoint_sections(net: &Mlp) -> Vec<Section> {
    let dims = Array2::from_shape_vec((1, net.layer_dims.len()), net.layer_dims.iter().map(|&d| d as f64).collect())
        .unwrap();
    let mut sections = vec![Section::new("layer_dims", dims)];
    for (l, (w, b)) in net.weights.iter().zip(&net.biases).enumerate() {
        sections.push(Section::new(format!("w{l}"), w.clone()));
        sections.push(Section::new(format!("b{l}"), b.clone().insert_axis(Axis(0))));
    }
    sections
}

pub fn save_checkpoint(path: impl AsRef<Path>, net: &Mlp) -> Result<()> {
    save_dmat(path, &checkpoint_sections(net))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Mlp> {
    let sections = load_dmat(path)?;
    let dims: Vec<usize> = find_section(&sections, "layer_dims")?.iter().map(|&d| d as usize).collect();
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 0..dims.len().saturating_sub(1) {
        weights.push(find_section(&sections, &format!("w{l}"))?.clone());
        biases.push(find_section(&sections, &format!("b{l}"))?.row(0).to_owned());
    }
    let net = Mlp {
        layer_dims: dims,
        weights,
        biases,
    };
    net.validate()?;
    Ok(net)
}

/// SHA-256 of the encoded checkpoint, hex.
pub fn params_digest(net: &Mlp) -> String {
    let bytes = encode_dmat(&checkpoint_sections(net)).expect("checkpoint encodes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Result of one training run.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub loss: LossKind,
    pub initial_digest: String,
    pub params: Mlp,
    pub history: Vec<f64>,
    pub test_mse: f64,
}

/// The shared starting network: `m` inputs, the configured hidden widths and
/// one output per full-state coordinate.
pub fn initial_network(cfg: &ExperimentConfig, data: &PreparedData) -> Result<Mlp> {
    let mut dims = vec![cfg.m];
    dims.extend(&cfg.hidden);
    dims.push(data.train_targets.ncols());
    init_mlp(&dims, derive_seed(cfg.seed, SeedStream::Init))
}

/// Methods enabled in the config, pointwise first.
pub fn enabled_methods(cfg: &ExperimentConfig) -> Vec<LossKind> {
    let mut methods = Vec::new();
    if cfg.run_pointwise {
        methods.push(LossKind::Pointwise);
    }
    if cfg.run_measure {
        methods.push(LossKind::Measure);
    }
    methods
}

pub fn train_method(cfg: &ExperimentConfig, data: &PreparedData, init: &Mlp, loss: LossKind) -> Result<(Mlp, Vec<f64>)> {
    let tc = TrainConfig {
        n_steps: cfg.steps,
        lr: cfg.lr,
        seed: derive_seed(cfg.seed, SeedStream::Training),
        loss,
        kernel: cfg.kernel,
        minibatch_per_measure: cfg.minibatch,
        deterministic: cfg.deterministic,
    };
    let train_data = match loss {
        LossKind::Pointwise => TrainingData::Pointwise {
            inputs: data.train_inputs.view(),
            targets: data.train_targets.view(),
        },
        LossKind::Measure => TrainingData::Measure(&data.pairs),
    };
    log::info!("training {loss} for {} steps", cfg.steps);
    train(init, train_data, &tc)
}

pub fn evaluate_on_test(params: &Mlp, data: &PreparedData) -> Result<f64> {
    evaluate_mse(params, &data.test_delay, data.test_targets.view())
}

/// Trains and evaluates every enabled method without touching the disk.
pub fn execute(cfg: &ExperimentConfig, data: &PreparedData) -> Result<(Mlp, Vec<MethodOutcome>)> {
    let init = initial_network(cfg, data)?;
    let mut outcomes = Vec::new();
    for loss in enabled_methods(cfg) {
        let start = init.clone();
        let initial_digest = params_digest(&start);
        let (params, history) = train_method(cfg, data, &start, loss)?;
        let test_mse = evaluate_on_test(&params, data)?;
        log::info!("{loss}: test MSE {test_mse:.6e}");
        outcomes.push(MethodOutcome {
            loss,
            initial_digest,
            params,
            history,
            test_mse,
        });
    }
    Ok((init, outcomes))
}

pub fn build_report(cfg: &ExperimentConfig, data: &PreparedData, outcomes: &[MethodOutcome], secs: f64) -> Result<Report> {
    let mut metrics = Vec::new();
    for o in outcomes {
        metrics.push((format!("{}_test_mse", o.loss), o.test_mse));
    }
    for o in outcomes {
        let last = o.history.last().copied().unwrap_or(f64::NAN);
        metrics.push((format!("{}_final_train_loss", o.loss), last));
    }
    metrics.push(("n_train".into(), data.train_inputs.nrows() as f64));
    metrics.push(("cells".into(), data.pairs.len() as f64));
    metrics.push(("tau_steps".into(), cfg.tau_steps()? as f64));
    metrics.push(("m".into(), cfg.m as f64));
    metrics.push(("steps".into(), cfg.steps as f64));
    metrics.push(("n_test".into(), data.test_targets.nrows() as f64));
    metrics.push(("seed".into(), cfg.seed as f64));
    Ok(Report {
        metrics,
        loss_histories: outcomes.iter().map(|o| (o.loss.to_string(), o.history.clone())).collect(),
        config_echo: cfg.echo(),
        seed: cfg.seed,
        wall_clock_secs: secs,
        init_digest: outcomes.first().map(|o| o.initial_digest.clone()).unwrap_or_default(),
    })
}

/// Runs the whole pipeline and writes the report, loss curves, config echo
/// and checkpoints into `cfg.out_dir`. Nothing is left behind on failure.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let started = Instant::now();
    let out = &cfg.out_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let staging = out.join(format!(".staging-{}", std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    fs::create_dir(&staging).map_err(|e| Error::io(&staging, e))?;

    let result = (|| -> Result<(Report, Vec<PathBuf>)> {
        let data = prepare_data(cfg)?;
        let (init, outcomes) = execute(cfg, &data)?;
        if outcomes.windows(2).any(|w| w[0].initial_digest != w[1].initial_digest) {
            return Err(Error::invalid("training runs did not share an initialisation"));
        }
        let report = build_report(cfg, &data, &outcomes, started.elapsed().as_secs_f64())?;
        let mut written = Vec::new();
        save_checkpoint(staging.join("init.dmat"), &init)?;
        written.push(PathBuf::from("init.dmat"));
        for o in &outcomes {
            let name = format!("{}.dmat", o.loss);
            save_checkpoint(staging.join(&name), &o.params)?;
            written.push(PathBuf::from(name));
        }
        for format in [ReportFormat::Csv, ReportFormat::Text] {
            for p in emit_report(&report, format, &staging)? {
                written.push(PathBuf::from(p.file_name().unwrap()));
            }
        }
        let echo = staging.join("config.echo");
        fs::write(&echo, &report.config_echo).map_err(|e| Error::io(&echo, e))?;
        written.push(PathBuf::from("config.echo"));
        written.sort();
        written.dedup();
        Ok((report, written))
    })();

    match result {
        Ok((report, written)) => {
            for name in written {
                let to = out.join(&name);
                fs::rename(staging.join(&name), &to).map_err(|e| Error::io(&to, e))?;
            }
            fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
            Ok(report)
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            Err(e)
        }
    }
}
