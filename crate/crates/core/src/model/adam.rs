use ndarray::Zip;

use super::mlp::{Gradients, Mlp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub first: Gradients,
    pub second: Gradients,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &Mlp, config: AdamConfig) -> Self {
        AdamState {
            config,
            first: Gradients::zeros_like(params),
            second: Gradients::zeros_like(params),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update. Parameters are untouched if any gradient
/// entry is non-finite.
pub fn adam_step(params: &mut Mlp, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    if grads.weights.len() != params.weights.len()
        || grads.biases.len() != params.biases.len()
        || grads.weights.iter().zip(&params.weights).any(|(g, w)| g.dim() != w.dim())
        || grads.biases.iter().zip(&params.biases).any(|(g, b)| g.len() != b.len())
    {
        return Err(Error::invalid("gradient shapes do not match the parameters"));
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            context: "in gradient passed to Adam".into(),
        });
    }
    state.step += 1;
    let AdamConfig { lr, beta1, beta2, eps } = state.config;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    let update = |p: &mut f64, g: &f64, m: &mut f64, v: &mut f64| {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    };
    for l in 0..params.weights.len() {
        Zip::from(&mut params.weights[l])
            .and(&grads.weights[l])
            .and(&mut state.first.weights[l])
            .and(&mut state.second.weights[l])
            .for_each(update);
        Zip::from(&mut params.biases[l])
            .and(&grads.biases[l])
            .and(&mut state.first.biases[l])
            .and(&mut state.second.biases[l])
            .for_each(update);
    }
    Ok(())
}
