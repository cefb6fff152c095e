use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LagDirection {
    /// `(s[t], s[t+tau], ..., s[t+(m-1)tau])`
    Forward,
    /// `(s[t], s[t-tau], ..., s[t-(m-1)tau])`
    #[default]
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayConfig {
    pub tau_steps: usize,
    pub m: usize,
    pub direction: LagDirection,
}

impl DelayConfig {
    pub fn new(tau_steps: usize, m: usize) -> Self {
        DelayConfig {
            tau_steps,
            m,
            direction: LagDirection::Backward,
        }
    }

    pub fn forward(mut self) -> Self {
        self.direction = LagDirection::Forward;
        self
    }

    /// Number of samples spanned by one delay vector minus one.
    pub fn window(&self) -> usize {
        (self.m - 1) * self.tau_steps
    }

    fn validate(&self) -> Result<()> {
        if self.tau_steps == 0 {
            return Err(Error::invalid("tau_steps must be at least 1"));
        }
        if self.m == 0 {
            return Err(Error::invalid("embedding dimension m must be at least 1"));
        }
        Ok(())
    }
}

/// Converts a continuous delay to whole sample steps.
pub fn tau_to_steps(tau: f64, dt: f64) -> Result<usize> {
    if !(tau > 0.0 && dt > 0.0) {
        return Err(Error::invalid(format!("tau ({tau}) and dt ({dt}) must be positive")));
    }
    Ok(((tau / dt).round() as usize).max(1))
}

/// Delay vectors, one per row.
///
/// Row `j` is built around source time index `j + index_offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayState {
    pub data: Array2<f64>,
    pub index_offset: usize,
    pub channels: usize,
    pub config: DelayConfig,
}

impl DelayState {
    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn width(&self) -> usize {
        self.data.ncols()
    }

    /// Source time index of row `j`.
    pub fn source_index(&self, row: usize) -> usize {
        row + self.index_offset
    }
}

pub fn delay_embed(series: ArrayView1<'_, f64>, cfg: DelayConfig) -> Result<DelayState> {
    vector_delay_embed(series.insert_axis(Axis(1)), cfg)
}

/// Multichannel delay state; each row concatenates whole channel blocks
/// `x(t), x(t -/+ tau), ...`.
pub fn vector_delay_embed(series: ArrayView2<'_, f64>, cfg: DelayConfig) -> Result<DelayState> {
    cfg.validate()?;
    let (n, channels) = series.dim();
    let window = cfg.window();
    if n <= window {
        return Err(Error::SeriesTooShort {
            min: window + 1,
            len: n,
        });
    }
    let n_valid = n - window;
    let index_offset = match cfg.direction {
        LagDirection::Forward => 0,
        LagDirection::Backward => window,
    };
    let mut data = Array2::zeros((n_valid, cfg.m * channels));
    for (j, mut row) in data.rows_mut().into_iter().enumerate() {
        let t = j + index_offset;
        for lag in 0..cfg.m {
            let src = match cfg.direction {
                LagDirection::Forward => t + lag * cfg.tau_steps,
                LagDirection::Backward => t - lag * cfg.tau_steps,
            };
            for c in 0..channels {
                row[lag * channels + c] = series[[src, c]];
            }
        }
    }
    Ok(DelayState {
        data,
        index_offset,
        channels,
        config: cfg,
    })
}
