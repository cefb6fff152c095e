//! Command-line front end. Every subcommand starts from the same resolved
//! [`ExperimentConfig`]: a preset or `--config` file, then `--set` overrides,
//! then the global flags.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{Array1, Array2, Axis};

use super::config::{DataSource, ExperimentConfig, KeyValues};
use super::csv_io::{load_csv_series, ColumnSelection};
use super::dmat::{load_dmat, save_dmat, Section};
use super::experiment::{
    enabled_methods, evaluate_on_test, initial_network, load_checkpoint, prepare_data, run_experiment,
    save_checkpoint, train_method,
};
use super::report::{format_sig6, parse_report_csv, report_text, Report, LOSSES_CSV, REPORT_CSV};
use crate::dynamics::{add_gaussian_noise, simulate};
use crate::embedding::{
    average_mutual_information, cao_curves, delay_embed, select_dim, select_tau, DEFAULT_AMI_BINS,
};
use crate::error::{Error, Result};
use crate::partition::constrained_kmeans;
use crate::pod::{pod_basis, pod_project};

#[derive(Debug, Parser)]
#[command(name = "measure-recon", version, about = "Full-state reconstruction from delay coordinates")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Experiment config file (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Preset used when no config file names a system.
    #[arg(long, global = true)]
    pub system: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["on", "off"])]
    pub deterministic: Option<String>,
    /// Config override, repeatable: `--set train.steps=100`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    Pointwise,
    Measure,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the configured system and write its trajectory.
    Simulate {
        /// Rows to keep after the transient; defaults to pool + window + test.
        #[arg(long)]
        rows: Option<usize>,
        /// Add the configured measurement noise.
        #[arg(long)]
        noisy: bool,
    },
    /// Delay-embed one column of a CSV or DMAT file.
    Embed {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: Option<usize>,
    },
    /// Estimate the delay (mutual information) and dimension (Cao).
    SelectParams {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: Option<usize>,
        #[arg(long, default_value_t = 200)]
        max_lag: usize,
        #[arg(long, default_value_t = 10)]
        max_dim: usize,
        #[arg(long, default_value_t = DEFAULT_AMI_BINS)]
        bins: usize,
    },
    /// Balanced k-means on the rows of a CSV or DMAT file.
    Cluster {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        cells: Option<usize>,
    },
    /// Train reconstruction networks and save checkpoints.
    Train {
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Test MSE of a checkpoint on the clean held-out segment.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// POD basis of a snapshot matrix (rows are snapshots).
    Pod {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        modes: usize,
    },
    /// Full experiment: data, clustering, both trainings, evaluation.
    Run,
    /// Render a saved report.
    Report {
        /// Directory holding report.csv; defaults to the output directory.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 success, 1 usage or config error, 2 runtime error.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                1
            } else {
                2
            }
        }
    }
}

pub fn resolve_config(global: &GlobalArgs) -> Result<ExperimentConfig> {
    let mut kv = match &global.config {
        Some(path) => KeyValues::load(path).map_err(|e| match e {
            Error::Io { path, source } => Error::Config(format!("cannot read config {}: {source}", path.display())),
            other => other,
        })?,
        None => KeyValues::default(),
    };
    if let Some(system) = &global.system {
        kv.set("system", system.as_str());
    }
    for o in &global.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {o:?}")))?;
        kv.set(k.trim(), v.trim());
    }
    if let Some(seed) = global.seed {
        kv.set("seed", seed.to_string());
    }
    if let Some(out) = &global.out {
        kv.set("out", out.display().to_string());
    }
    if let Some(d) = &global.deterministic {
        kv.set("deterministic", d.as_str());
    }
    ExperimentConfig::from_key_values(&kv)
}

fn dispatch(cli: Cli) -> Result<()> {
    let cfg = resolve_config(&cli.global)?;
    let out = cfg.out_dir.clone();
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    match cli.command {
        Command::Simulate { rows, noisy } => cmd_simulate(&cfg, rows, noisy),
        Command::Embed { input, column } => cmd_embed(&cfg, &input, column),
        Command::SelectParams {
            input,
            column,
            max_lag,
            max_dim,
            bins,
        } => cmd_select_params(&cfg, &input, column, max_lag, max_dim, bins),
        Command::Cluster { input, cells } => cmd_cluster(&cfg, &input, cells),
        Command::Train { method } => cmd_train(&cfg, method),
        Command::Evaluate { checkpoint } => cmd_evaluate(&cfg, &checkpoint),
        Command::Pod { input, modes } => cmd_pod(&cfg, &input, modes),
        Command::Run => {
            let report = run_experiment(&cfg)?;
            print!("{}", report_text(&report));
            Ok(())
        }
        Command::Report { input, format } => cmd_report(input.as_deref().unwrap_or(&out), format),
    }
}

/// Reads a matrix from `.dmat` (first section) or CSV.
pub fn load_matrix(path: &Path) -> Result<Array2<f64>> {
    if !path.exists() {
        return Err(Error::invalid(format!("input {} does not exist", path.display())));
    }
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("dmat")) {
        let mut sections = load_dmat(path)?;
        if sections.is_empty() {
            return Err(Error::Format {
                offset: 8,
                msg: format!("{} has no sections", path.display()),
            });
        }
        let pick = sections.iter().position(|s| s.name == "states").unwrap_or(0);
        Ok(sections.swap_remove(pick).data)
    } else {
        load_csv_series(path, &ColumnSelection::All)
    }
}

pub fn write_matrix_csv(path: &Path, header: &[String], data: &Array2<f64>) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for row in data.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn column_names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn write_metrics(path: &Path, metrics: &[(String, f64)]) -> Result<()> {
    let mut s = String::from("metric,value\n");
    for (k, v) in metrics {
        writeln!(s, "{k},{v:e}").unwrap();
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn observable_column(cfg: &ExperimentConfig, data: &Array2<f64>, column: Option<usize>) -> Result<Array1<f64>> {
    let c = column.unwrap_or(cfg.observable);
    if c >= data.ncols() {
        return Err(Error::Config(format!("column {c} out of range for {} columns", data.ncols())));
    }
    Ok(data.column(c).to_owned())
}

fn cmd_simulate(cfg: &ExperimentConfig, rows: Option<usize>, noisy: bool) -> Result<()> {
    let DataSource::Simulated { system, x0, n_transient } = &cfg.source else {
        return Err(Error::Config("simulate needs a system, not data.path".into()));
    };
    let rows = match rows {
        Some(r) => r,
        None => cfg.n_pool + cfg.delay_config()?.window() + cfg.n_test,
    };
    let mut traj = simulate(&system.system(), x0, cfg.dt, *n_transient, rows)?;
    if noisy {
        let variances = if cfg.noise_variance.len() == 1 {
            vec![cfg.noise_variance[0]; traj.dim()]
        } else {
            cfg.noise_variance.clone()
        };
        traj = add_gaussian_noise(&traj, &variances, cfg.seed)?;
    }
    let sections = [
        Section::new("times", traj.times.clone().insert_axis(Axis(1))),
        Section::new("states", traj.states.clone()),
    ];
    save_dmat(cfg.out_dir.join("trajectory.dmat"), &sections)?;
    write_matrix_csv(&cfg.out_dir.join("trajectory.csv"), &column_names("x", traj.dim()), &traj.states)?;
    println!("wrote {} rows of {} to {}", traj.len(), system.name(), cfg.out_dir.display());
    Ok(())
}

fn cmd_embed(cfg: &ExperimentConfig, input: &Path, column: Option<usize>) -> Result<()> {
    let data = load_matrix(input)?;
    let series = observable_column(cfg, &data, column)?;
    let state = delay_embed(series.view(), cfg.delay_config()?)?;
    let index = Array2::from_shape_fn((state.len(), 1), |(r, _)| state.source_index(r) as f64);
    save_dmat(
        cfg.out_dir.join("delay.dmat"),
        &[Section::new("delay", state.data.clone()), Section::new("source_index", index)],
    )?;
    write_matrix_csv(&cfg.out_dir.join("delay.csv"), &column_names("y", state.width()), &state.data)?;
    println!("{} delay vectors of width {}", state.len(), state.width());
    Ok(())
}

fn cmd_select_params(
    cfg: &ExperimentConfig,
    input: &Path,
    column: Option<usize>,
    max_lag: usize,
    max_dim: usize,
    bins: usize,
) -> Result<()> {
    let data = load_matrix(input)?;
    let series = observable_column(cfg, &data, column)?;
    let ami = average_mutual_information(series.view(), max_lag, bins)?;
    let tau = select_tau(&ami);
    let cao = cao_curves(series.view(), tau.tau_steps, max_dim)?;
    let dim = select_dim(&cao.e1, 0.95);

    let ami_rows = Array2::from_shape_fn((ami.len(), 2), |(i, j)| if j == 0 { (i + 1) as f64 } else { ami[i] });
    write_matrix_csv(&cfg.out_dir.join("ami.csv"), &["lag".into(), "ami".into()], &ami_rows)?;
    let cao_rows = Array2::from_shape_fn((cao.e1.len(), 3), |(i, j)| match j {
        0 => (i + 1) as f64,
        1 => cao.e1[i],
        _ => cao.e2[i],
    });
    write_matrix_csv(&cfg.out_dir.join("cao.csv"), &["d".into(), "e1".into(), "e2".into()], &cao_rows)?;
    let fragment = format!("embed.tau_steps = {}\nembed.m = {}\n", tau.tau_steps, dim.m);
    let path = cfg.out_dir.join("params.conf");
    fs::write(&path, &fragment).map_err(|e| Error::io(&path, e))?;
    if tau.fallback {
        println!("# no local minimum of the mutual information, using the global minimum");
    }
    if dim.fallback {
        println!("# E1 never reached 0.95, using its maximum");
    }
    print!("{fragment}");
    Ok(())
}

fn cmd_cluster(cfg: &ExperimentConfig, input: &Path, cells: Option<usize>) -> Result<()> {
    let points = load_matrix(input)?;
    let k = cells.unwrap_or(cfg.cells);
    let seed = super::experiment::derive_seed(cfg.seed, super::experiment::SeedStream::Clustering);
    let km = constrained_kmeans(points.view(), k, seed, cfg.kmeans_max_iters)?;
    let labels = Array2::from_shape_fn((km.labels.len(), 1), |(i, _)| km.labels[i] as f64);
    write_matrix_csv(&cfg.out_dir.join("labels.csv"), &["cell".into()], &labels)?;
    write_matrix_csv(&cfg.out_dir.join("centers.csv"), &column_names("c", km.centers.ncols()), &km.centers)?;
    let sse = Array2::from_shape_fn((km.sse_history.len(), 2), |(i, j)| if j == 0 { i as f64 } else { km.sse_history[i] });
    write_matrix_csv(&cfg.out_dir.join("sse.csv"), &["iteration".into(), "sse".into()], &sse)?;
    println!(
        "{k} cells after {} iterations, final SSE {}",
        km.iterations,
        format_sig6(*km.sse_history.last().unwrap_or(&f64::NAN))
    );
    Ok(())
}

fn cmd_train(cfg: &ExperimentConfig, method: Option<Method>) -> Result<()> {
    let data = prepare_data(cfg)?;
    let init = initial_network(cfg, &data)?;
    let methods = match method {
        Some(Method::Pointwise) => vec![crate::model::LossKind::Pointwise],
        Some(Method::Measure) => vec![crate::model::LossKind::Measure],
        None => enabled_methods(cfg),
    };
    save_checkpoint(cfg.out_dir.join("init.dmat"), &init)?;
    let mut histories = Vec::new();
    for loss in methods {
        let (params, history) = train_method(cfg, &data, &init, loss)?;
        save_checkpoint(cfg.out_dir.join(format!("{loss}.dmat")), &params)?;
        println!("{loss}: final training loss {}", format_sig6(*history.last().unwrap_or(&f64::NAN)));
        histories.push((loss.to_string(), history));
    }
    let report = Report {
        metrics: Vec::new(),
        loss_histories: histories,
        config_echo: cfg.echo(),
        seed: cfg.seed,
        wall_clock_secs: 0.0,
        init_digest: String::new(),
    };
    let path = cfg.out_dir.join(LOSSES_CSV);
    fs::write(&path, super::report::losses_csv(&report)).map_err(|e| Error::io(&path, e))
}

fn cmd_evaluate(cfg: &ExperimentConfig, checkpoint: &Path) -> Result<()> {
    let net = load_checkpoint(checkpoint)?;
    let data = prepare_data(cfg)?;
    let mse = evaluate_on_test(&net, &data)?;
    write_metrics(&cfg.out_dir.join("evaluation.csv"), &[("test_mse".into(), mse)])?;
    println!("test MSE {}", format_sig6(mse));
    Ok(())
}

fn cmd_pod(cfg: &ExperimentConfig, input: &Path, modes: usize) -> Result<()> {
    let snapshots = load_matrix(input)?;
    let basis = pod_basis(snapshots.view(), modes)?;
    let coeffs = pod_project(&basis, snapshots.view())?;
    save_dmat(
        cfg.out_dir.join("pod.dmat"),
        &[
            Section::new("mean", basis.mean.clone().insert_axis(Axis(0))),
            Section::new("modes", basis.modes.clone()),
            Section::new("eigenvalues", basis.eigenvalues.clone().insert_axis(Axis(0))),
            Section::new("coefficients", coeffs.clone()),
        ],
    )?;
    write_matrix_csv(&cfg.out_dir.join("pod_coefficients.csv"), &column_names("a", modes), &coeffs)?;
    write_metrics(
        &cfg.out_dir.join("pod.csv"),
        &[
            ("modes".into(), modes as f64),
            ("captured_fraction".into(), basis.captured_fraction()),
            ("total_energy".into(), basis.total_energy),
        ],
    )?;
    println!("{modes} modes capture {} of the variance", format_sig6(basis.captured_fraction()));
    Ok(())
}

fn cmd_report(dir: &Path, format: OutputFormat) -> Result<()> {
    let path = dir.join(REPORT_CSV);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let metrics = parse_report_csv(&text)?;
    match format {
        OutputFormat::Csv => print!("{text}"),
        OutputFormat::Text => {
            let width = metrics.iter().map(|(n, _)| n.len()).max().unwrap_or(6).max(6);
            for (name, value) in &metrics {
                println!("{name:<width$}  {}", format_sig6(*value));
            }
        }
    }
    Ok(())
}
