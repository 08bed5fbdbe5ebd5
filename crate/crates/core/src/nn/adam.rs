//! Adam optimizer state and update.

use crate::error::{Error, Result};
use crate::nn::{Gradients, ModelGraph, TrainConfig};

/// Per-parameter first/second moment estimates, one pair of blocks per
/// layer (weights, bias), plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<(Vec<f64>, Vec<f64>)>,
    v: Vec<(Vec<f64>, Vec<f64>)>,
    pub step: u64,
}

impl AdamState {
    pub fn for_model(model: &ModelGraph) -> Self {
        let zeros: Vec<(Vec<f64>, Vec<f64>)> = model
            .layers
            .iter()
            .map(|l| {
                let (w, b) = l.params();
                (vec![0.0; w.len()], vec![0.0; b.len()])
            })
            .collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    /// One bias-corrected Adam update of every model parameter.
    pub fn apply(
        &mut self,
        model: &mut ModelGraph,
        grads: &Gradients,
        cfg: &TrainConfig,
    ) -> Result<()> {
        if grads.per_layer.len() != model.layers.len() || self.m.len() != model.layers.len() {
            return Err(Error::ShapeMismatch(
                "optimizer state / gradient layer count differs from model".into(),
            ));
        }
        self.step += 1;
        let b1 = cfg.adam_beta1;
        let b2 = cfg.adam_beta2;
        let bc1 = 1.0 - b1.powi(self.step as i32);
        let bc2 = 1.0 - b2.powi(self.step as i32);

        for (layer_idx, layer) in model.layers.iter_mut().enumerate() {
            let (gw, gb) = (
                &grads.per_layer[layer_idx].0,
                &grads.per_layer[layer_idx].1,
            );
            let (w, b) = layer.params_mut();
            if gw.len() != w.len() || gb.len() != b.len() {
                return Err(Error::ShapeMismatch(format!(
                    "gradient block sizes ({}, {}) differ from layer {layer_idx} ({}, {})",
                    gw.len(),
                    gb.len(),
                    w.len(),
                    b.len()
                )));
            }
            let (mw, mb) = {
                let pair = &mut self.m[layer_idx];
                (&mut pair.0, &mut pair.1)
            };
            let (vw, vb) = {
                let pair = &mut self.v[layer_idx];
                (&mut pair.0, &mut pair.1)
            };
            update_block(w, gw, mw, vw, cfg, b1, b2, bc1, bc2);
            update_block(b, gb, mb, vb, cfg, b1, b2, bc1, bc2);
            if !w.iter().all(|x| x.is_finite()) || !b.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFiniteValue(format!(
                    "parameters of layer {layer_idx} after Adam step"
                )));
            }
        }
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn update_block(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    cfg: &TrainConfig,
    b1: f64,
    b2: f64,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
    }
}

/// Free-function form of the update, for callers holding the pieces.
pub fn adam_step(
    model: &mut ModelGraph,
    grads: &Gradients,
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<()> {
    state.apply(model, grads, cfg)
}
