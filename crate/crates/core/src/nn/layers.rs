//! Dense and 1-D convolution layers with elementwise activations.

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

/// Elementwise nonlinearity applied after a layer's affine map.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Activation {
    Linear,
    /// Rectifier, `max(0, x)`.
    Relu,
    /// Leaky rectifier with the given negative-side slope.
    LeakyRelu { slope: f64 },
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Activation::Linear => x,
            Activation::Relu => x.max(0.0),
            Activation::LeakyRelu { slope } => {
                if x > 0.0 {
                    x
                } else {
                    slope * x
                }
            }
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative with respect to the pre-activation value.
    pub fn derivative(&self, pre: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu { slope } => {
                if pre > 0.0 {
                    1.0
                } else {
                    *slope
                }
            }
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + (-pre).exp());
                s * (1.0 - s)
            }
            Activation::Tanh => {
                let t = pre.tanh();
                1.0 - t * t
            }
        }
    }
}

/// Fully connected layer: `y = act(W x + b)` with `W` stored `[out, in]`
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl DenseLayer {
    /// Uniform init in `±sqrt(6 / (fan_in + fan_out))`.
    pub fn glorot(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut impl Rng) -> Self {
        let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        DenseLayer {
            weights,
            bias: vec![0.0; out_dim],
            in_dim,
            out_dim,
            activation,
        }
    }

    fn forward_into(&self, input: &[f64], pre: &mut Vec<f64>) {
        pre.clear();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = self.bias[o];
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            pre.push(acc);
        }
    }
}

/// 1-D convolution with same-length zero padding: input `[channels, n]`,
/// output `[filters, n]`. Filters are stored `[filter, channel, tap]`
/// row-major; the tap count is odd so padding is symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1dLayer {
    pub filters: Vec<f64>,
    pub bias: Vec<f64>,
    pub num_filters: usize,
    pub in_channels: usize,
    pub filter_len: usize,
    pub activation: Activation,
}

impl Conv1dLayer {
    pub fn glorot(
        num_filters: usize,
        in_channels: usize,
        filter_len: usize,
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if filter_len % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "conv filter length must be odd, got {filter_len}"
            )));
        }
        let fan_in = in_channels * filter_len;
        let fan_out = num_filters * filter_len;
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let filters = (0..num_filters * in_channels * filter_len)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Ok(Conv1dLayer {
            filters,
            bias: vec![0.0; num_filters],
            num_filters,
            in_channels,
            filter_len,
            activation,
        })
    }

    fn tap(&self, f: usize, c: usize, j: usize) -> f64 {
        self.filters[(f * self.in_channels + c) * self.filter_len + j]
    }

    fn forward_into(&self, input: &[f64], n: usize, pre: &mut Vec<f64>) {
        let radius = (self.filter_len - 1) / 2;
        pre.clear();
        pre.resize(self.num_filters * n, 0.0);
        for f in 0..self.num_filters {
            let out = &mut pre[f * n..(f + 1) * n];
            for v in out.iter_mut() {
                *v = self.bias[f];
            }
            for c in 0..self.in_channels {
                let x = &input[c * n..(c + 1) * n];
                for j in 0..self.filter_len {
                    let w = self.tap(f, c, j);
                    if w == 0.0 {
                        continue;
                    }
                    // out[t] += w * x[t + j - radius]
                    let (t_lo, t_hi) = shifted_range(n, j as isize - radius as isize);
                    let off = j as isize - radius as isize;
                    for t in t_lo..t_hi {
                        out[t] += w * x[(t as isize + off) as usize];
                    }
                }
            }
        }
    }
}

/// Valid output positions `t` such that `t + off` lies in `[0, n)`.
fn shifted_range(n: usize, off: isize) -> (usize, usize) {
    let lo = (-off).max(0) as usize;
    let hi = ((n as isize - off).max(0) as usize).min(n);
    (lo.min(hi), hi)
}

/// A network layer.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense(DenseLayer),
    Conv1d(Conv1dLayer),
}

impl Layer {
    pub fn activation(&self) -> Activation {
        match self {
            Layer::Dense(d) => d.activation,
            Layer::Conv1d(c) => c.activation,
        }
    }

    /// (weights, bias) parameter slices.
    pub fn params(&self) -> (&[f64], &[f64]) {
        match self {
            Layer::Dense(d) => (&d.weights, &d.bias),
            Layer::Conv1d(c) => (&c.filters, &c.bias),
        }
    }

    pub fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        match self {
            Layer::Dense(d) => (&mut d.weights, &mut d.bias),
            Layer::Conv1d(c) => (&mut c.filters, &mut c.bias),
        }
    }

    /// Output shape for an input shape, or a shape error.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        match self {
            Layer::Dense(d) => {
                if input == [d.in_dim] {
                    Ok(vec![d.out_dim])
                } else {
                    Err(Error::ShapeMismatch(format!(
                        "dense layer expects [{}], got {:?}",
                        d.in_dim, input
                    )))
                }
            }
            Layer::Conv1d(c) => {
                if input.len() == 2 && input[0] == c.in_channels {
                    Ok(vec![c.num_filters, input[1]])
                } else {
                    Err(Error::ShapeMismatch(format!(
                        "conv layer expects [{}, n], got {:?}",
                        c.in_channels, input
                    )))
                }
            }
        }
    }

    /// Computes pre-activation values for `input` into `pre`.
    pub fn forward_pre(&self, input: &Tensor, pre: &mut Vec<f64>) -> Result<Vec<usize>> {
        let out_shape = self.output_shape(&input.shape)?;
        match self {
            Layer::Dense(d) => d.forward_into(&input.data, pre),
            Layer::Conv1d(c) => c.forward_into(&input.data, input.shape[1], pre),
        }
        Ok(out_shape)
    }

    /// Accumulates parameter gradients and the gradient w.r.t. the layer
    /// input, given `d_pre` = dLoss/d(pre-activation).
    pub fn backward(
        &self,
        input: &Tensor,
        d_pre: &[f64],
        d_weights: &mut [f64],
        d_bias: &mut [f64],
        d_input: &mut [f64],
    ) {
        match self {
            Layer::Dense(d) => {
                for o in 0..d.out_dim {
                    let g = d_pre[o];
                    d_bias[o] += g;
                    let wrow = &d.weights[o * d.in_dim..(o + 1) * d.in_dim];
                    let grow = &mut d_weights[o * d.in_dim..(o + 1) * d.in_dim];
                    for i in 0..d.in_dim {
                        grow[i] += g * input.data[i];
                        d_input[i] += g * wrow[i];
                    }
                }
            }
            Layer::Conv1d(c) => {
                let n = input.shape[1];
                let radius = (c.filter_len - 1) / 2;
                for f in 0..c.num_filters {
                    let dz = &d_pre[f * n..(f + 1) * n];
                    d_bias[f] += dz.iter().sum::<f64>();
                    for ch in 0..c.in_channels {
                        let x = &input.data[ch * n..(ch + 1) * n];
                        let dx = &mut d_input[ch * n..(ch + 1) * n];
                        for j in 0..c.filter_len {
                            let off = j as isize - radius as isize;
                            let (t_lo, t_hi) = shifted_range(n, off);
                            let mut wg = 0.0;
                            let w = c.tap(f, ch, j);
                            for t in t_lo..t_hi {
                                let xi = (t as isize + off) as usize;
                                wg += dz[t] * x[xi];
                                dx[xi] += dz[t] * w;
                            }
                            d_weights[(f * c.in_channels + ch) * c.filter_len + j] += wg;
                        }
                    }
                }
            }
        }
    }
}
