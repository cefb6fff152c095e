use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};

/// Dense feed-forward network: tanh on hidden layers, affine output.
///
/// `weights[l]` has shape `(layer_dims[l], layer_dims[l + 1])` and acts on row
/// vectors, so a batch maps as `X · W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Parameter-shaped container for gradients and optimizer moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn zeros_like(params: &Mlp) -> Self {
        Gradients {
            weights: params.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            biases: params.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .chain(self.biases.iter().flat_map(|b| b.iter()))
    }

    pub fn norm(&self) -> f64 {
        self.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Glorot-uniform weights and zero biases.
pub fn init_mlp(layer_dims: &[usize], seed: u64) -> Result<Mlp> {
    if layer_dims.len() < 2 {
        return Err(Error::invalid("a network needs at least an input and an output layer"));
    }
    if layer_dims.contains(&0) {
        return Err(Error::invalid("layer widths must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::with_capacity(layer_dims.len() - 1);
    let mut biases = Vec::with_capacity(layer_dims.len() - 1);
    for pair in layer_dims.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w = Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-limit..=limit));
        weights.push(w);
        biases.push(Array1::zeros(fan_out));
    }
    Ok(Mlp {
        layer_dims: layer_dims.to_vec(),
        weights,
        biases,
    })
}

/// Per-layer outputs kept for the backward pass. `activations[0]` is the
/// input and `activations[l + 1]` the output of layer `l`.
pub(crate) struct ForwardCache {
    pub activations: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().unwrap()
    }
}

impl Mlp {
    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn params_iter(&self) -> impl Iterator<Item = &f64> {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .chain(self.biases.iter().flat_map(|b| b.iter()))
    }

    /// Checks that shapes chain and every value is finite.
    pub fn validate(&self) -> Result<()> {
        if self.layer_dims.len() < 2
            || self.weights.len() != self.layer_dims.len() - 1
            || self.biases.len() != self.weights.len()
        {
            return Err(Error::invalid("layer count does not match layer_dims"));
        }
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            if w.dim() != (self.layer_dims[l], self.layer_dims[l + 1]) || b.len() != self.layer_dims[l + 1] {
                return Err(Error::invalid(format!("layer {l} shape does not match layer_dims")));
            }
        }
        if self.params_iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "in network parameters".into(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, batch: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        check_dim("network input width", self.input_dim(), batch.ncols())?;
        let mut h = batch.to_owned();
        for l in 0..self.n_layers() {
            h = self.layer(l, h.view());
        }
        Ok(h)
    }

    fn layer(&self, l: usize, input: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut z = input.dot(&self.weights[l]);
        z += &self.biases[l];
        if l + 1 < self.n_layers() {
            z.mapv_inplace(f64::tanh);
        }
        z
    }

    pub(crate) fn forward_cached(&self, batch: ArrayView2<'_, f64>) -> Result<ForwardCache> {
        check_dim("network input width", self.input_dim(), batch.ncols())?;
        let mut activations = Vec::with_capacity(self.n_layers() + 1);
        activations.push(batch.to_owned());
        for l in 0..self.n_layers() {
            let next = self.layer(l, activations[l].view());
            activations.push(next);
        }
        Ok(ForwardCache { activations })
    }

    /// Backpropagates `d_output = ∂L/∂output` through the cached pass.
    pub(crate) fn backward(&self, cache: &ForwardCache, d_output: Array2<f64>) -> Gradients {
        let n = self.n_layers();
        let mut weights = Vec::with_capacity(n);
        let mut biases = Vec::with_capacity(n);
        let mut delta = d_output;
        for l in (0..n).rev() {
            weights.push(cache.activations[l].t().dot(&delta));
            biases.push(delta.sum_axis(Axis(0)));
            if l > 0 {
                let mut back = delta.dot(&self.weights[l].t());
                // tanh' = 1 - tanh²
                back.zip_mut_with(&cache.activations[l], |g, a| *g *= 1.0 - a * a);
                delta = back;
            }
        }
        weights.reverse();
        biases.reverse();
        Gradients { weights, biases }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn init_is_seeded_bounded_and_unbiased() {
        let dims = [3, 100, 100, 100, 100, 3];
        let a = init_mlp(&dims, 42).unwrap();
        assert_eq!(a, init_mlp(&dims, 42).unwrap());
        assert_ne!(a, init_mlp(&dims, 43).unwrap());
        assert!(a.biases.iter().all(|b| b.iter().all(|v| *v == 0.0)));
        for (l, w) in a.weights.iter().enumerate() {
            let limit = (6.0 / (dims[l] + dims[l + 1]) as f64).sqrt();
            assert!(w.iter().all(|v| v.abs() <= limit));
        }
        a.validate().unwrap();
    }

    #[test]
    fn init_rejects_bad_dims() {
        assert!(init_mlp(&[3], 0).is_err());
        assert!(init_mlp(&[3, 0, 2], 0).is_err());
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut net = init_mlp(&[2, 5, 3], 1).unwrap();
        net.weights.iter_mut().for_each(|w| w.fill(0.0));
        let out = net.forward(array![[1.0, -2.0], [3.0, 4.0]].view()).unwrap();
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_linear_layer_identity() {
        let net = Mlp {
            layer_dims: vec![2, 2],
            weights: vec![Array2::eye(2)],
            biases: vec![Array1::zeros(2)],
        };
        let x = array![[1.5, -2.0]];
        assert_eq!(net.forward(x.view()).unwrap(), x);
    }

    #[test]
    fn one_one_one_by_hand() {
        let net = Mlp {
            layer_dims: vec![1, 1, 1],
            weights: vec![array![[1.0]], array![[2.0]]],
            biases: vec![array![0.0], array![0.5]],
        };
        let y = net.forward(array![[0.5]].view()).unwrap();
        assert!((y[[0, 0]] - (2.0 * 0.5f64.tanh() + 0.5)).abs() < 1e-15);
        assert!((y[[0, 0]] - 1.424234).abs() < 1e-6);
    }

    #[test]
    fn width_mismatch() {
        let net = init_mlp(&[3, 4, 2], 0).unwrap();
        assert!(net.forward(Array2::zeros((2, 2)).view()).is_err());
    }
}
