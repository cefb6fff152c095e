//! Benchmark chaotic systems, a fixed-step RK4 integrator and extrinsic
//! observation noise.
//!
//! The three systems are Lorenz-63, Rössler and a four-species competitive
//! Lotka–Volterra model, each with the parameter values commonly used to put
//! them on a chaotic attractor.

use ndarray::{Array1, Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};

/// Any component larger than this in magnitude is treated as a blow-up.
pub const DIVERGENCE_LIMIT: f64 = 1e8;

/// Right-hand side of an autonomous ODE `dx/dt = f(x)`.
pub trait VectorField {
    fn dim(&self) -> usize;

    /// Writes `f(x)` into `out`. Both slices have length `self.dim()`.
    fn eval_into(&self, x: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeSystem {
    /// `a = (sigma, rho, beta)`.
    Lorenz63 { a: [f64; 3] },
    /// `b = (a, b, c)` in the usual Rössler notation.
    Rossler { b: [f64; 3] },
    /// Competitive LV: `dx_i/dt = r_i x_i (1 - sum_j alpha_ij x_j)`.
    LotkaVolterra4 { r: [f64; 4], alpha: [[f64; 4]; 4] },
}

impl OdeSystem {
    pub fn lorenz() -> Self {
        OdeSystem::Lorenz63 {
            a: [10.0, 28.0, 8.0 / 3.0],
        }
    }

    pub fn rossler() -> Self {
        OdeSystem::Rossler {
            b: [0.1, 0.1, 14.0],
        }
    }

    pub fn lotka_volterra() -> Self {
        OdeSystem::LotkaVolterra4 {
            r: [1.0, 0.72, 1.53, 1.27],
            alpha: [
                [1.0, 1.09, 1.52, 0.0],
                [0.0, 1.0, 0.44, 1.36],
                [2.33, 0.0, 1.0, 0.47],
                [1.21, 0.51, 0.35, 1.0],
            ],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OdeSystem::Lorenz63 { .. } => "lorenz",
            OdeSystem::Rossler { .. } => "rossler",
            OdeSystem::LotkaVolterra4 { .. } => "lotka-volterra",
        }
    }

    /// Default initial condition inside the basin of the chaotic set.
    pub fn default_initial_state(&self) -> Vec<f64> {
        match self {
            OdeSystem::Lorenz63 { .. } | OdeSystem::Rossler { .. } => vec![1.0, 1.0, 1.0],
            OdeSystem::LotkaVolterra4 { .. } => vec![0.3; 4],
        }
    }

    pub fn default_dt(&self) -> f64 {
        match self {
            OdeSystem::Rossler { .. } => 0.05,
            _ => 0.01,
        }
    }

    /// Evaluates the vector field, checking the state dimension.
    pub fn vector_field(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("vector_field state", self.dim(), x.len())?;
        let mut out = vec![0.0; x.len()];
        self.eval_into(x, &mut out);
        Ok(out)
    }
}

impl VectorField for OdeSystem {
    fn dim(&self) -> usize {
        match self {
            OdeSystem::Lorenz63 { .. } | OdeSystem::Rossler { .. } => 3,
            OdeSystem::LotkaVolterra4 { .. } => 4,
        }
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            OdeSystem::Lorenz63 { a } => {
                out[0] = a[0] * (x[1] - x[0]);
                out[1] = x[0] * (a[1] - x[2]) - x[1];
                out[2] = x[0] * x[1] - a[2] * x[2];
            }
            OdeSystem::Rossler { b } => {
                out[0] = -x[1] - x[2];
                out[1] = x[0] + b[0] * x[1];
                out[2] = b[1] + x[2] * (x[0] - b[2]);
            }
            OdeSystem::LotkaVolterra4 { r, alpha } => {
                for i in 0..4 {
                    let crowding: f64 = (0..4).map(|j| alpha[i][j] * x[j]).sum();
                    out[i] = r[i] * x[i] * (1.0 - crowding);
                }
            }
        }
    }
}

/// One classical four-stage Runge–Kutta step.
pub fn rk4_step<F: VectorField + ?Sized>(field: &F, x: &[f64], dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("rk4 step size must be positive, got {dt}")));
    }
    let d = field.dim();
    check_dim("rk4_step state", d, x.len())?;

    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let mut tmp = vec![0.0; d];

    field.eval_into(x, &mut k1);
    for i in 0..d {
        tmp[i] = x[i] + 0.5 * dt * k1[i];
    }
    field.eval_into(&tmp, &mut k2);
    for i in 0..d {
        tmp[i] = x[i] + 0.5 * dt * k2[i];
    }
    field.eval_into(&tmp, &mut k3);
    for i in 0..d {
        tmp[i] = x[i] + dt * k3[i];
    }
    field.eval_into(&tmp, &mut k4);

    let next: Vec<f64> = (0..d)
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    let stages = k1.iter().chain(&k2).chain(&k3).chain(&k4);
    if stages.chain(&next).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "in RK4 stage".into(),
        });
    }
    Ok(next)
}

/// Uniformly sampled states; row `i` is the state at `times[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Array1<f64>,
    pub states: Array2<f64>,
}

impl Trajectory {
    pub fn new(times: Array1<f64>, states: Array2<f64>) -> Result<Self> {
        check_dim("trajectory rows", times.len(), states.nrows())?;
        if times.len() >= 2 && !(times[1] - times[0] > 0.0) {
            return Err(Error::invalid("trajectory time step must be positive"));
        }
        if states.iter().chain(times.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "in trajectory".into(),
            });
        }
        Ok(Trajectory { times, states })
    }

    pub fn len(&self) -> usize {
        self.states.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.states.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.states.ncols()
    }

    /// Rows `start..end` as a new trajectory.
    pub fn slice_rows(&self, start: usize, end: usize) -> Trajectory {
        Trajectory {
            times: self.times.slice(ndarray::s![start..end]).to_owned(),
            states: self.states.slice(ndarray::s![start..end, ..]).to_owned(),
        }
    }

    pub fn component(&self, col: usize) -> ArrayView1<'_, f64> {
        self.states.column(col)
    }
}

/// Integrates `n_transient + n_keep` steps from `x0` and keeps the last
/// `n_keep` states. With no transient the first kept row is `x0` itself.
pub fn simulate<F: VectorField + ?Sized>(
    field: &F,
    x0: &[f64],
    dt: f64,
    n_transient: usize,
    n_keep: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    if n_keep == 0 {
        return Err(Error::invalid("n_keep must be at least 1"));
    }
    let d = field.dim();
    check_dim("initial state", d, x0.len())?;

    let mut states = Array2::zeros((n_keep, d));
    let mut x = x0.to_vec();
    let total = n_transient + n_keep;
    for step in 0..total {
        if step >= n_transient {
            states.row_mut(step - n_transient).assign(&ArrayView1::from(&x[..]));
        }
        if step + 1 == total {
            break;
        }
        x = rk4_step(field, &x, dt).map_err(|e| match e {
            Error::NonFinite { .. } => Error::Diverged {
                step: step + 1,
                limit: DIVERGENCE_LIMIT,
            },
            other => other,
        })?;
        if x.iter().any(|v| v.abs() > DIVERGENCE_LIMIT) {
            return Err(Error::Diverged {
                step: step + 1,
                limit: DIVERGENCE_LIMIT,
            });
        }
    }
    let times = Array1::from_iter((0..n_keep).map(|i| (n_transient + i) as f64 * dt));
    Ok(Trajectory { times, states })
}

/// Adds independent `N(0, variances[j])` noise to column `j`.
///
/// Each entry's draw depends only on `(seed, row, col)`, so noising a slice
/// with the matching row offset reproduces the same values.
pub fn add_gaussian_noise(traj: &Trajectory, variances: &[f64], seed: u64) -> Result<Trajectory> {
    add_gaussian_noise_at(traj, variances, seed, 0)
}

/// Like [`add_gaussian_noise`] but row `i` of `traj` is treated as absolute
/// row `row_offset + i` for seed derivation.
pub fn add_gaussian_noise_at(
    traj: &Trajectory,
    variances: &[f64],
    seed: u64,
    row_offset: usize,
) -> Result<Trajectory> {
    check_dim("noise variances", traj.dim(), variances.len())?;
    if let Some(v) = variances.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::invalid(format!("noise variance must be non-negative, got {v}")));
    }
    let mut out = traj.clone();
    for ((row, col), value) in out.states.indexed_iter_mut() {
        let var = variances[col];
        if var == 0.0 {
            continue;
        }
        *value += var.sqrt() * entry_normal(seed, (row_offset + row) as u64, col as u64);
    }
    Ok(out)
}

fn entry_normal(seed: u64, row: u64, col: u64) -> f64 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&row.to_le_bytes());
    key[16..24].copy_from_slice(&col.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    StandardNormal.sample(&mut rng)
}
