//! Plain-text experiment configuration.
//!
//! One `key = value` per line, `#` starts a comment, nested keys are dotted
//! (`train.lr = 1e-3`). Lists are comma separated. The `system` key picks a
//! preset first; every other key overrides a field of that preset.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dynamics::OdeSystem;
use crate::embedding::{tau_to_steps, DelayConfig, LagDirection};
use crate::error::{Error, Result};
use crate::metrics::KernelSpec;

/// Ordered `key -> value` pairs with the line each came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c)) {
                return Err(Error::Config(format!("line {}: invalid key {key:?}", i + 1)));
            }
            if entries.insert(key.to_string(), (value.trim().to_string(), i + 1)).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {key:?}", i + 1)));
            }
        }
        Ok(KeyValues { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (value.into(), 0));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Config(format!("line {line}: cannot parse {key} = {v:?}"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<T>())
                .collect::<std::result::Result<Vec<T>, _>>()
                .map(Some)
                .map_err(|_| Error::Config(format!("line {line}: cannot parse list {key} = {v:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Lorenz,
    Rossler,
    LotkaVolterra,
}

impl SystemKind {
    pub fn system(&self) -> OdeSystem {
        match self {
            SystemKind::Lorenz => OdeSystem::lorenz(),
            SystemKind::Rossler => OdeSystem::rossler(),
            SystemKind::LotkaVolterra => OdeSystem::lotka_volterra(),
        }
    }

    pub fn name(&self) -> &'static str {
        self.system().name()
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lorenz" | "lorenz63" | "lorenz-63" => Ok(SystemKind::Lorenz),
            "rossler" | "rössler" => Ok(SystemKind::Rossler),
            "lotka-volterra" | "lotka_volterra" | "lv" => Ok(SystemKind::LotkaVolterra),
            other => Err(Error::Config(format!("unknown system {other:?}"))),
        }
    }
}

/// Where the full-state trajectory comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Simulated { system: SystemKind, x0: Vec<f64>, n_transient: usize },
    /// CSV (all columns) or DMAT (section `states`) of full-state rows.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delay {
    Steps(usize),
    /// In time units, rounded to steps of `dt`.
    Time(F64Bits),
}

/// `f64` stored by bits so configs can derive `Eq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct F64Bits(u64);

impl F64Bits {
    pub fn new(v: f64) -> Self {
        F64Bits(v.to_bits())
    }
    pub fn get(&self) -> f64 {
        f64::from_bits(self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub dt: f64,
    /// Column of the full state used as the scalar observable.
    pub observable: usize,
    /// Rows of the (noisy) trajectory the training pairs are drawn from.
    pub n_pool: usize,
    /// Per-dimension noise variances; one value is broadcast.
    pub noise_variance: Vec<f64>,
    pub n_train: usize,
    pub cells: usize,
    pub kmeans_max_iters: usize,
    pub delay: Delay,
    pub m: usize,
    pub direction: LagDirection,
    pub hidden: Vec<usize>,
    pub steps: usize,
    pub lr: f64,
    pub kernel: KernelSpec,
    pub minibatch: Option<usize>,
    /// Clean held-out rows evaluated after training.
    pub n_test: usize,
    pub run_pointwise: bool,
    pub run_measure: bool,
    pub seed: u64,
    pub deterministic: bool,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Noisy-reconstruction defaults for one of the benchmark systems.
    pub fn preset(system: SystemKind) -> Self {
        let (dt, tau, m, var) = match system {
            SystemKind::Lorenz => (0.01, 0.18, 4, 0.1),
            SystemKind::Rossler => (0.05, 1.44, 4, 0.1),
            SystemKind::LotkaVolterra => (0.01, 6.90, 5, 5e-5),
        };
        let sys = system.system();
        ExperimentConfig {
            source: DataSource::Simulated {
                system,
                x0: sys.default_initial_state(),
                n_transient: 10_000,
            },
            dt,
            observable: 0,
            n_pool: 100_000,
            noise_variance: vec![var],
            n_train: 2000,
            cells: 20,
            kmeans_max_iters: 100,
            delay: Delay::Time(F64Bits::new(tau)),
            m,
            direction: LagDirection::Backward,
            hidden: vec![100; 4],
            steps: 50_000,
            lr: 1e-3,
            kernel: KernelSpec::Energy,
            minibatch: None,
            n_test: 10_000,
            run_pointwise: true,
            run_measure: true,
            seed: 0,
            deterministic: true,
            out_dir: PathBuf::from("out"),
        }
    }

    pub fn tau_steps(&self) -> Result<usize> {
        match self.delay {
            Delay::Steps(s) => Ok(s),
            Delay::Time(t) => tau_to_steps(t.get(), self.dt),
        }
    }

    pub fn delay_config(&self) -> Result<DelayConfig> {
        Ok(DelayConfig {
            tau_steps: self.tau_steps()?,
            m: self.m,
            direction: self.direction,
        })
    }

    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let system: SystemKind = kv.parsed::<String>("system")?.as_deref().unwrap_or("lorenz").parse()?;
        let mut cfg = Self::preset(system);
        for key in kv.keys() {
            cfg.apply(kv, key)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_key_values(&KeyValues::load(path)?)
    }

    fn apply(&mut self, kv: &KeyValues, key: &str) -> Result<()> {
        let v = || kv.get(key).unwrap();
        match key {
            "system" => {}
            "data.path" => self.source = DataSource::File { path: PathBuf::from(v()) },
            "data.observable" => self.observable = kv.parsed(key)?.unwrap(),
            "sim.dt" => self.dt = kv.parsed(key)?.unwrap(),
            "sim.x0" => {
                if let DataSource::Simulated { x0, .. } = &mut self.source {
                    *x0 = kv.list(key)?.unwrap();
                }
            }
            "sim.n_transient" => {
                if let DataSource::Simulated { n_transient, .. } = &mut self.source {
                    *n_transient = kv.parsed(key)?.unwrap();
                }
            }
            "sim.n_pool" => self.n_pool = kv.parsed(key)?.unwrap(),
            "noise.variance" => self.noise_variance = kv.list(key)?.unwrap(),
            "n_train" => self.n_train = kv.parsed(key)?.unwrap(),
            "cells" => self.cells = kv.parsed(key)?.unwrap(),
            "kmeans.max_iters" => self.kmeans_max_iters = kv.parsed(key)?.unwrap(),
            "embed.tau" => self.delay = Delay::Time(F64Bits::new(kv.parsed(key)?.unwrap())),
            "embed.tau_steps" => self.delay = Delay::Steps(kv.parsed(key)?.unwrap()),
            "embed.m" => self.m = kv.parsed(key)?.unwrap(),
            "embed.direction" => {
                self.direction = match v() {
                    "forward" => LagDirection::Forward,
                    "backward" => LagDirection::Backward,
                    other => return Err(Error::Config(format!("embed.direction must be forward or backward, got {other:?}"))),
                }
            }
            "network.hidden" => self.hidden = kv.list(key)?.unwrap(),
            "train.steps" => self.steps = kv.parsed(key)?.unwrap(),
            "train.lr" => self.lr = kv.parsed(key)?.unwrap(),
            "train.kernel" | "train.sigma" => {
                let kind = kv.get("train.kernel").unwrap_or("energy");
                self.kernel = match kind {
                    "energy" => KernelSpec::Energy,
                    "gaussian" => {
                        let sigma = kv
                            .parsed::<f64>("train.sigma")?
                            .ok_or_else(|| Error::Config("train.kernel = gaussian needs train.sigma".into()))?;
                        KernelSpec::gaussian(sigma).map_err(|e| Error::Config(e.to_string()))?
                    }
                    other => return Err(Error::Config(format!("unknown kernel {other:?}"))),
                };
            }
            "train.minibatch" => {
                self.minibatch = match v() {
                    "all" | "none" => None,
                    _ => Some(kv.parsed(key)?.unwrap()),
                }
            }
            "eval.n_test" => self.n_test = kv.parsed(key)?.unwrap(),
            "methods" => {
                let methods: Vec<String> = kv.list(key)?.unwrap();
                self.run_pointwise = methods.iter().any(|m| m == "pointwise");
                self.run_measure = methods.iter().any(|m| m == "measure");
                if let Some(bad) = methods.iter().find(|m| *m != "pointwise" && *m != "measure") {
                    return Err(Error::Config(format!("unknown method {bad:?}")));
                }
            }
            "seed" => self.seed = kv.parsed(key)?.unwrap(),
            "deterministic" => self.deterministic = parse_on_off(v())?,
            "out" => self.out_dir = PathBuf::from(v()),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_train", self.n_train),
            ("cells", self.cells),
            ("embed.m", self.m),
            ("eval.n_test", self.n_test),
            ("sim.n_pool", self.n_pool),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config("sim.dt must be positive".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config("train.lr must be positive".into()));
        }
        if self.cells > self.n_train {
            return Err(Error::Config("cells cannot exceed n_train".into()));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Config("network.hidden widths must be positive".into()));
        }
        if self.noise_variance.is_empty() || self.noise_variance.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Config("noise.variance must be non-negative".into()));
        }
        if self.minibatch == Some(0) {
            return Err(Error::Config("train.minibatch must be positive".into()));
        }
        if !self.run_pointwise && !self.run_measure {
            return Err(Error::Config("methods must name at least one method".into()));
        }
        self.tau_steps().map_err(|e| Error::Config(e.to_string()))?;
        if let DataSource::File { path } = &self.source {
            if !path.exists() {
                return Err(Error::Config(format!("data.path {} does not exist", path.display())));
            }
        }
        Ok(())
    }

    /// Resolved settings as `key = value` lines; parses back to the same config.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        match &self.source {
            DataSource::Simulated { system, x0, n_transient } => {
                writeln!(s, "system = {}", system.name()).unwrap();
                writeln!(s, "sim.x0 = {}", list(x0)).unwrap();
                writeln!(s, "sim.n_transient = {n_transient}").unwrap();
            }
            DataSource::File { path } => writeln!(s, "data.path = {}", path.display()).unwrap(),
        }
        writeln!(s, "data.observable = {}", self.observable).unwrap();
        writeln!(s, "sim.dt = {:e}", self.dt).unwrap();
        writeln!(s, "sim.n_pool = {}", self.n_pool).unwrap();
        writeln!(s, "noise.variance = {}", list(&self.noise_variance)).unwrap();
        writeln!(s, "n_train = {}", self.n_train).unwrap();
        writeln!(s, "cells = {}", self.cells).unwrap();
        writeln!(s, "kmeans.max_iters = {}", self.kmeans_max_iters).unwrap();
        match self.delay {
            Delay::Steps(t) => writeln!(s, "embed.tau_steps = {t}").unwrap(),
            Delay::Time(t) => writeln!(s, "embed.tau = {:e}", t.get()).unwrap(),
        }
        writeln!(s, "embed.m = {}", self.m).unwrap();
        let dir = match self.direction {
            LagDirection::Forward => "forward",
            LagDirection::Backward => "backward",
        };
        writeln!(s, "embed.direction = {dir}").unwrap();
        let hidden: Vec<String> = self.hidden.iter().map(|h| h.to_string()).collect();
        writeln!(s, "network.hidden = {}", hidden.join(",")).unwrap();
        writeln!(s, "train.steps = {}", self.steps).unwrap();
        writeln!(s, "train.lr = {:e}", self.lr).unwrap();
        match self.kernel {
            KernelSpec::Energy => writeln!(s, "train.kernel = energy").unwrap(),
            KernelSpec::Gaussian { sigma } => {
                writeln!(s, "train.kernel = gaussian").unwrap();
                writeln!(s, "train.sigma = {sigma:e}").unwrap();
            }
        }
        match self.minibatch {
            None => writeln!(s, "train.minibatch = all").unwrap(),
            Some(b) => writeln!(s, "train.minibatch = {b}").unwrap(),
        }
        writeln!(s, "eval.n_test = {}", self.n_test).unwrap();
        let mut methods = Vec::new();
        if self.run_pointwise {
            methods.push("pointwise");
        }
        if self.run_measure {
            methods.push("measure");
        }
        writeln!(s, "methods = {}", methods.join(",")).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "deterministic = {}", if self.deterministic { "on" } else { "off" }).unwrap();
        writeln!(s, "out = {}", self.out_dir.display()).unwrap();
        s
    }
}

pub fn parse_on_off(v: &str) -> Result<bool> {
    match v {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        other => Err(Error::Config(format!("expected on or off, got {other:?}"))),
    }
}
