//! Minimal trainable neural-network engine: tensors, dense and 1-D
//! convolution layers, MSE loss with optional L2 weight penalty, exact
//! reverse-mode gradients, and Adam.

pub mod adam;
pub mod layers;
pub mod tensor;

pub use adam::{adam_step, AdamState};
pub use layers::{Activation, Conv1dLayer, DenseLayer, Layer};
pub use tensor::Tensor;

use crate::error::{Error, Result};

/// Which signal domain a model maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DomainTag {
    /// Feature-vector in, feature-vector out (dense layers).
    Spectral,
    /// One-channel sample sequence in and out (conv layers).
    Waveform,
}

impl DomainTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            DomainTag::Spectral => "spectral",
            DomainTag::Waveform => "waveform",
        }
    }
}

/// Optimizer hyperparameters shared by all training entry points.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Weight of the L2 penalty on weight matrices/filters.
    pub l2_rho: f64,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 40,
            batch_size: 1,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            l2_rho: 2e-4,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.l2_rho < 0.0 {
            return Err(Error::InvalidConfig("l2_rho must be >= 0".into()));
        }
        Ok(())
    }
}

/// A sequential network of dense or conv layers.
///
/// Immutable during inference; training mutates one instance and must be
/// externally serialized per model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGraph {
    pub layers: Vec<Layer>,
    pub domain_tag: DomainTag,
    pub name: String,
}

impl ModelGraph {
    /// Builds and validates a graph: non-empty, layer kinds matching the
    /// domain, and adjacent shapes composing.
    pub fn new(name: impl Into<String>, domain_tag: DomainTag, layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("model needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            match (domain_tag, l) {
                (DomainTag::Spectral, Layer::Dense(_)) => {}
                (DomainTag::Waveform, Layer::Conv1d(_)) => {}
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "layer {i} kind does not match domain {}",
                        domain_tag.as_str()
                    )))
                }
            }
        }
        for i in 0..layers.len() - 1 {
            match (&layers[i], &layers[i + 1]) {
                (Layer::Dense(a), Layer::Dense(b)) => {
                    if a.out_dim != b.in_dim {
                        return Err(Error::ShapeMismatch(format!(
                            "dense layer {i} outputs {}, layer {} expects {}",
                            a.out_dim,
                            i + 1,
                            b.in_dim
                        )));
                    }
                }
                (Layer::Conv1d(a), Layer::Conv1d(b)) => {
                    if a.num_filters != b.in_channels {
                        return Err(Error::ShapeMismatch(format!(
                            "conv layer {i} outputs {} channels, layer {} expects {}",
                            a.num_filters,
                            i + 1,
                            b.in_channels
                        )));
                    }
                }
                _ => unreachable!("kinds verified above"),
            }
        }
        Ok(ModelGraph {
            layers,
            domain_tag,
            name: name.into(),
        })
    }

    pub fn has_dense_layer(&self) -> bool {
        self.layers.iter().any(|l| matches!(l, Layer::Dense(_)))
    }

    pub fn num_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| {
                let (w, b) = l.params();
                w.len() + b.len()
            })
            .sum()
    }
}

/// Per-layer activation cache kept by `forward_cached` for `backward`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer (the network input, then each activated output).
    inputs: Vec<Tensor>,
    /// Pre-activation values of each layer.
    pres: Vec<Vec<f64>>,
    /// Output shape of each layer.
    shapes: Vec<Vec<usize>>,
}

/// Per-layer parameter gradients, shaped like the layer parameter blocks.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub per_layer: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradients {
    pub fn zeros_like(model: &ModelGraph) -> Self {
        Gradients {
            per_layer: model
                .layers
                .iter()
                .map(|l| {
                    let (w, b) = l.params();
                    (vec![0.0; w.len()], vec![0.0; b.len()])
                })
                .collect(),
        }
    }

    /// Adds `other`, elementwise.
    pub fn accumulate(&mut self, other: &Gradients) -> Result<()> {
        if self.per_layer.len() != other.per_layer.len() {
            return Err(Error::ShapeMismatch("gradient layer counts differ".into()));
        }
        for (a, b) in self.per_layer.iter_mut().zip(&other.per_layer) {
            for (x, y) in a.0.iter_mut().zip(&b.0) {
                *x += y;
            }
            for (x, y) in a.1.iter_mut().zip(&b.1) {
                *x += y;
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for (w, b) in &mut self.per_layer {
            for x in w.iter_mut() {
                *x *= factor;
            }
            for x in b.iter_mut() {
                *x *= factor;
            }
        }
    }
}

/// Sequential forward pass.
pub fn forward(model: &ModelGraph, input: &Tensor) -> Result<Tensor> {
    let (out, _) = forward_cached(model, input)?;
    Ok(out)
}

/// Forward pass that also returns the activation cache for `backward`.
pub fn forward_cached(model: &ModelGraph, input: &Tensor) -> Result<(Tensor, ForwardCache)> {
    input.check_finite("network input")?;
    let mut cache = ForwardCache {
        inputs: Vec::with_capacity(model.layers.len()),
        pres: Vec::with_capacity(model.layers.len()),
        shapes: Vec::with_capacity(model.layers.len()),
    };
    let mut current = input.clone();
    for (i, layer) in model.layers.iter().enumerate() {
        let mut pre = Vec::new();
        let out_shape = layer.forward_pre(&current, &mut pre)?;
        let act = layer.activation();
        let data: Vec<f64> = pre.iter().map(|&z| act.apply(z)).collect();
        let out = Tensor::new(out_shape.clone(), data)?;
        out.check_finite(&format!("layer {i} output"))?;
        cache.inputs.push(current);
        cache.pres.push(pre);
        cache.shapes.push(out_shape);
        current = out;
    }
    Ok((current, cache))
}

/// Mean squared error over all elements, with its gradient w.r.t. `pred`.
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    if pred.shape != target.shape {
        return Err(Error::ShapeMismatch(format!(
            "mse_loss shapes {:?} vs {:?}",
            pred.shape, target.shape
        )));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(pred.len());
    for (p, t) in pred.data.iter().zip(&target.data) {
        let d = p - t;
        loss += d * d;
        grad.push(2.0 * d / n);
    }
    Ok((loss / n, Tensor::new(pred.shape.clone(), grad)?))
}

/// L2 penalty `rho * sum ||W||_F^2` over weight matrices/filters (biases
/// excluded), with per-parameter gradient `2 rho W`.
pub fn l2_penalty(model: &ModelGraph, rho: f64) -> (f64, Vec<Vec<f64>>) {
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(model.layers.len());
    for layer in &model.layers {
        let (w, _) = layer.params();
        let mut g = Vec::with_capacity(w.len());
        for &x in w {
            total += x * x;
            g.push(2.0 * rho * x);
        }
        grads.push(g);
    }
    (rho * total, grads)
}

/// Exact reverse-mode gradients of all layer parameters given the loss
/// gradient at the network output.
pub fn backward(model: &ModelGraph, cache: &ForwardCache, loss_grad: &Tensor) -> Result<Gradients> {
    if cache.inputs.len() != model.layers.len() {
        return Err(Error::ShapeMismatch(
            "forward cache does not match model depth".into(),
        ));
    }
    let last_shape = cache.shapes.last().expect("non-empty model");
    if &loss_grad.shape != last_shape {
        return Err(Error::ShapeMismatch(format!(
            "loss gradient shape {:?} vs model output {:?}",
            loss_grad.shape, last_shape
        )));
    }

    let mut grads = Gradients::zeros_like(model);
    let mut d_out = loss_grad.data.clone();
    for (i, layer) in model.layers.iter().enumerate().rev() {
        let act = layer.activation();
        let pre = &cache.pres[i];
        let mut d_pre = Vec::with_capacity(pre.len());
        for (g, &z) in d_out.iter().zip(pre) {
            d_pre.push(g * act.derivative(z));
        }
        let input = &cache.inputs[i];
        let mut d_input = vec![0.0; input.len()];
        let (dw, db) = &mut grads.per_layer[i];
        layer.backward(input, &d_pre, dw, db, &mut d_input);
        d_out = d_input;
    }
    Ok(grads)
}

/// One optimization step on a single (input, target) example: forward,
/// MSE + L2 objective, backward, Adam. Returns the total objective value.
pub fn train_step(
    model: &mut ModelGraph,
    input: &Tensor,
    target: &Tensor,
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<f64> {
    batch_train_step(model, &[(input, target)], state, cfg)
}

/// Averaged-gradient step over a batch: forward/backward per example, mean
/// gradients, L2 penalty once, one Adam update. Returns the batch
/// objective (mean MSE plus penalty).
pub fn batch_train_step(
    model: &mut ModelGraph,
    batch: &[(&Tensor, &Tensor)],
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut total_mse = 0.0;
    let mut grads = Gradients::zeros_like(model);
    for (input, target) in batch {
        let (pred, cache) = forward_cached(model, input)?;
        let (mse, loss_grad) = mse_loss(&pred, target)?;
        total_mse += mse;
        let g = backward(model, &cache, &loss_grad)?;
        grads.accumulate(&g)?;
    }
    grads.scale(1.0 / batch.len() as f64);
    let (penalty, l2_grads) = l2_penalty(model, cfg.l2_rho);
    for (layer_grads, l2g) in grads.per_layer.iter_mut().zip(&l2_grads) {
        for (g, p) in layer_grads.0.iter_mut().zip(l2g) {
            *g += p;
        }
    }
    state.apply(model, &grads, cfg)?;
    Ok(total_mse / batch.len() as f64 + penalty)
}

/// Total objective (MSE + L2 penalty) without touching parameters.
pub fn evaluate_objective(
    model: &ModelGraph,
    input: &Tensor,
    target: &Tensor,
    rho: f64,
) -> Result<f64> {
    let pred = forward(model, input)?;
    let (mse, _) = mse_loss(&pred, target)?;
    let (penalty, _) = l2_penalty(model, rho);
    Ok(mse + penalty)
}
