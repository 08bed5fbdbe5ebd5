//! Waveform-domain enhancer: an all-convolutional network mapping noisy
//! sample sequences directly to clean ones, trained with a mean squared
//! waveform error per utterance.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audio::AudioClip;
use crate::ddae::TrainingTrace;
use crate::error::{Error, Result};
use crate::nn::{
    batch_train_step, forward, Activation, Conv1dLayer, DomainTag, Layer, ModelGraph, Tensor,
    TrainConfig,
};

/// Architecture of the waveform enhancer. All layers use same-length zero
/// padding; the final layer has a single output channel.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FcnConfig {
    pub num_layers: usize,
    pub filters_per_layer: usize,
    /// Odd filter length.
    pub filter_len: usize,
    pub hidden_activation: Activation,
    /// Bounds output samples; hyperbolic tangent keeps them in (-1, 1).
    pub output_activation: Activation,
}

impl Default for FcnConfig {
    fn default() -> Self {
        FcnConfig {
            num_layers: 6,
            filters_per_layer: 16,
            filter_len: 55,
            hidden_activation: Activation::LeakyRelu { slope: 0.2 },
            output_activation: Activation::Tanh,
        }
    }
}

impl FcnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_layers == 0 || self.filters_per_layer == 0 {
            return Err(Error::InvalidConfig(
                "need at least one layer and one filter".into(),
            ));
        }
        if self.filter_len % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "filter_len must be odd, got {}",
                self.filter_len
            )));
        }
        Ok(())
    }
}

/// Builds a randomly initialized waveform model from seeded weights.
pub fn build_fcn(cfg: &FcnConfig, rng: &mut ChaCha8Rng) -> Result<ModelGraph> {
    cfg.validate()?;
    let mut layers = Vec::with_capacity(cfg.num_layers);
    for i in 0..cfg.num_layers {
        let last = i + 1 == cfg.num_layers;
        let in_channels = if i == 0 { 1 } else { cfg.filters_per_layer };
        let num_filters = if last { 1 } else { cfg.filters_per_layer };
        let act = if last {
            cfg.output_activation
        } else {
            cfg.hidden_activation
        };
        layers.push(Layer::Conv1d(Conv1dLayer::glorot(
            num_filters,
            in_channels,
            cfg.filter_len,
            act,
            rng,
        )?));
    }
    ModelGraph::new("fcn", DomainTag::Waveform, layers)
}

fn check_pairs(pairs: &[(AudioClip, AudioClip)]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    for (i, (noisy, clean)) in pairs.iter().enumerate() {
        if noisy.len() != clean.len() {
            return Err(Error::LengthMismatch {
                index: i,
                noisy: noisy.len(),
                clean: clean.len(),
            });
        }
        noisy.validate("training pair noisy side")?;
        clean.validate("training pair clean side")?;
    }
    Ok(())
}

fn waveform_tensor(clip: &AudioClip) -> Tensor {
    Tensor {
        shape: vec![1, clip.len()],
        data: clip.samples.clone(),
    }
}

/// Trains a waveform enhancer; each optimizer step sees `batch_size`
/// whole utterances (one by default).
pub fn train_fcn(
    pairs: &[(AudioClip, AudioClip)],
    cfg: &FcnConfig,
    tc: &TrainConfig,
) -> Result<(ModelGraph, TrainingTrace)> {
    cfg.validate()?;
    tc.validate()?;
    check_pairs(pairs)?;

    let mut rng = ChaCha8Rng::seed_from_u64(tc.rng_seed);
    let mut graph = build_fcn(cfg, &mut rng)?;
    let trace = run_epochs(&mut graph, pairs, tc, tc.epochs, &mut rng)?;
    Ok((graph, trace))
}

/// Continues training an existing waveform model with a fresh optimizer
/// state. `epochs` of zero leaves the parameters untouched.
pub fn continue_train_fcn(
    model: &ModelGraph,
    pairs: &[(AudioClip, AudioClip)],
    tc: &TrainConfig,
) -> Result<(ModelGraph, TrainingTrace)> {
    if model.domain_tag != DomainTag::Waveform {
        return Err(Error::DomainMismatch {
            model_domain: model.domain_tag.as_str(),
            needed: "waveform",
        });
    }
    if !(tc.learning_rate > 0.0) || tc.batch_size < 1 || tc.l2_rho < 0.0 {
        return Err(Error::InvalidConfig("bad adaptation train config".into()));
    }
    check_pairs(pairs)?;
    let mut graph = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(tc.rng_seed);
    let trace = run_epochs(&mut graph, pairs, tc, tc.epochs, &mut rng)?;
    Ok((graph, trace))
}

fn run_epochs(
    graph: &mut ModelGraph,
    pairs: &[(AudioClip, AudioClip)],
    tc: &TrainConfig,
    epochs: usize,
    rng: &mut ChaCha8Rng,
) -> Result<TrainingTrace> {
    let inputs: Vec<Tensor> = pairs.iter().map(|(n, _)| waveform_tensor(n)).collect();
    let targets: Vec<Tensor> = pairs.iter().map(|(_, c)| waveform_tensor(c)).collect();

    let mut state = crate::nn::AdamState::for_model(graph);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut epoch_objectives = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        order.shuffle(rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(tc.batch_size) {
            let batch: Vec<(&Tensor, &Tensor)> =
                chunk.iter().map(|&i| (&inputs[i], &targets[i])).collect();
            total += batch_train_step(graph, &batch, &mut state, tc)?;
            batches += 1;
        }
        epoch_objectives.push(total / batches.max(1) as f64);
    }
    Ok(TrainingTrace { epoch_objectives })
}

/// Enhances a clip with a single forward pass on the raw waveform.
pub fn enhance_fcn(clip: &AudioClip, model: &ModelGraph) -> Result<AudioClip> {
    if model.domain_tag != DomainTag::Waveform {
        return Err(Error::DomainMismatch {
            model_domain: model.domain_tag.as_str(),
            needed: "waveform",
        });
    }
    clip.validate("fcn input")?;
    let out = forward(model, &waveform_tensor(clip))?;
    let mut enhanced = AudioClip::new(out.data, clip.sample_rate_hz);
    enhanced.label = clip.label.clone();
    Ok(enhanced)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::REQUIRED_SAMPLE_RATE;
    use rand::Rng;

    fn tone(freq: f64, n: usize, amp: f64) -> AudioClip {
        AudioClip::new(
            (0..n)
                .map(|i| amp * (std::f64::consts::TAU * freq * i as f64 / 16_000.0).sin())
                .collect(),
            REQUIRED_SAMPLE_RATE,
        )
    }

    fn noisy(clip: &AudioClip, amp: f64, seed: u64) -> AudioClip {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AudioClip::new(
            clip.samples
                .iter()
                .map(|s| s + rng.random_range(-amp..amp))
                .collect(),
            clip.sample_rate_hz,
        )
    }

    fn small_cfg() -> FcnConfig {
        FcnConfig {
            num_layers: 3,
            filters_per_layer: 4,
            filter_len: 9,
            ..FcnConfig::default()
        }
    }

    #[test]
    fn model_has_no_dense_layer() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let model = build_fcn(&FcnConfig::default(), &mut rng).unwrap();
        assert!(!model.has_dense_layer());
        assert_eq!(model.layers.len(), 6);
    }

    #[test]
    fn untrained_model_output_is_bounded_and_right_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = build_fcn(&small_cfg(), &mut rng).unwrap();
        let clip = noisy(&tone(300.0, 3001, 0.5), 0.1, 2);
        let out = enhance_fcn(&clip, &model).unwrap();
        assert_eq!(out.len(), 3001);
        assert_eq!(out.sample_rate_hz, clip.sample_rate_hz);
        assert!(out.samples.iter().all(|s| s.is_finite() && s.abs() < 1.0));
    }

    #[test]
    fn zero_input_through_zero_weights_gives_zero_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut model = build_fcn(&small_cfg(), &mut rng).unwrap();
        for layer in &mut model.layers {
            let (w, b) = layer.params_mut();
            w.iter_mut().for_each(|x| *x = 0.0);
            b.iter_mut().for_each(|x| *x = 0.0);
        }
        let clip = AudioClip::new(vec![0.0; 500], REQUIRED_SAMPLE_RATE);
        let out = enhance_fcn(&clip, &model).unwrap();
        assert!(out.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn identity_training_beats_untrained_mse() {
        let pairs: Vec<(AudioClip, AudioClip)> = (0..3)
            .map(|i| {
                let c = noisy(&tone(200.0 + 80.0 * i as f64, 1200, 0.3), 0.05, i as u64);
                (c.clone(), c)
            })
            .collect();
        let cfg = small_cfg();
        let tc = TrainConfig {
            epochs: 40,
            rng_seed: 3,
            ..TrainConfig::default()
        };

        let waveform_mse = |model: &ModelGraph| -> f64 {
            pairs
                .iter()
                .map(|(n, c)| {
                    let out = enhance_fcn(n, model).unwrap();
                    out.samples
                        .iter()
                        .zip(&c.samples)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        / c.len() as f64
                })
                .sum::<f64>()
                / pairs.len() as f64
        };

        let mut rng = ChaCha8Rng::seed_from_u64(tc.rng_seed);
        let untrained = build_fcn(&cfg, &mut rng).unwrap();
        let baseline = waveform_mse(&untrained);
        let (trained, trace) = train_fcn(&pairs, &cfg, &tc).unwrap();
        let final_mse = waveform_mse(&trained);
        assert!(
            final_mse < 0.1 * baseline,
            "trained {final_mse} vs untrained {baseline}"
        );
        assert!(trace.epoch_objectives.last().unwrap() < trace.epoch_objectives.first().unwrap());
    }

    #[test]
    fn training_is_deterministic() {
        let pairs: Vec<(AudioClip, AudioClip)> = (0..2)
            .map(|i| {
                let c = tone(250.0 + 50.0 * i as f64, 800, 0.4);
                (noisy(&c, 0.1, i as u64), c)
            })
            .collect();
        let tc = TrainConfig {
            epochs: 3,
            rng_seed: 8,
            ..TrainConfig::default()
        };
        let (a, _) = train_fcn(&pairs, &small_cfg(), &tc).unwrap();
        let (b, _) = train_fcn(&pairs, &small_cfg(), &tc).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn interior_shift_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let cfg = small_cfg();
        let model = build_fcn(&cfg, &mut rng).unwrap();
        let n = 2000;
        let shift = 256;
        let clip = noisy(&tone(440.0, n, 0.4), 0.1, 4);
        let mut delayed_samples = vec![0.0; shift];
        delayed_samples.extend_from_slice(&clip.samples);
        let delayed = AudioClip::new(delayed_samples, REQUIRED_SAMPLE_RATE);

        let out = enhance_fcn(&clip, &model).unwrap();
        let out_delayed = enhance_fcn(&delayed, &model).unwrap();

        // Interior positions, excluding the composed receptive-field radius.
        let radius = cfg.num_layers * (cfg.filter_len - 1) / 2;
        for t in radius..n - radius {
            let d = (out.samples[t] - out_delayed.samples[t + shift]).abs();
            assert!(d < 1e-9, "t={t}: {d}");
        }
    }

    #[test]
    fn domain_mismatch_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let dense = ModelGraph::new(
            "d",
            DomainTag::Spectral,
            vec![Layer::Dense(crate::nn::DenseLayer::glorot(
                4,
                4,
                Activation::Linear,
                &mut rng,
            ))],
        )
        .unwrap();
        let clip = tone(300.0, 600, 0.2);
        assert!(matches!(
            enhance_fcn(&clip, &dense),
            Err(Error::DomainMismatch { .. })
        ));
    }
}
