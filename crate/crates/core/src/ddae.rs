//! Spectral-mapping enhancer: a dense network trained to map noisy
//! log-magnitude features (with context frames) to clean ones, resynthesized
//! with the noisy phase.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audio::AudioClip;
use crate::dsp::{features_to_spectrogram, istft, log_magnitude, stft, LogMagFeatures, StftConfig};
use crate::error::{Error, Result};
use crate::nn::{
    batch_train_step, forward, Activation, AdamState, DenseLayer, DomainTag, Layer, ModelGraph,
    Tensor, TrainConfig,
};

/// Architecture and featurization choices of the spectral enhancer.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DdaeConfig {
    /// Odd number of concatenated frames fed to the network.
    pub context_frames: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub hidden_activation: Activation,
    /// Feature front end shared with the synthesis path.
    pub stft: StftConfig,
}

impl Default for DdaeConfig {
    fn default() -> Self {
        DdaeConfig {
            context_frames: 5,
            hidden_layers: 3,
            hidden_width: 128,
            hidden_activation: Activation::Relu,
            stft: StftConfig::default(),
        }
    }
}

impl DdaeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.context_frames % 2 == 0 || self.context_frames == 0 {
            return Err(Error::InvalidConfig(format!(
                "context_frames must be odd and >= 1, got {}",
                self.context_frames
            )));
        }
        if self.hidden_width == 0 {
            return Err(Error::InvalidConfig("hidden_width must be >= 1".into()));
        }
        self.stft.validate()
    }
}

/// Per-dimension mean/variance statistics learned from training features.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// Computes statistics over rows of equal length; standard deviations
    /// are floored to keep them strictly positive.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let dims = rows.first().ok_or(Error::EmptyTrainingSet)?.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0f64; dims];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = vec![0.0f64; dims];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                let d = x - m;
                *v += d * d;
            }
        }
        let std = var
            .iter()
            .map(|v| (v / n).sqrt().max(1e-8))
            .collect();
        Ok(NormStats { mean, std })
    }

    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn denormalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }
}

/// A trained spectral enhancer: network plus featurization statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct DdaeModel {
    pub graph: ModelGraph,
    pub input_norm: NormStats,
    pub output_norm: NormStats,
    pub cfg: DdaeConfig,
}

/// Per-epoch objective values recorded during training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    pub epoch_objectives: Vec<f64>,
}

/// Concatenates `k` frames around each frame (edges replicated) into one
/// input vector per frame.
pub fn featurize_context(feat: &LogMagFeatures, k: usize) -> Vec<Vec<f64>> {
    assert!(k % 2 == 1, "context size must be odd");
    let radius = (k - 1) as isize / 2;
    let nf = feat.num_frames as isize;
    (0..nf)
        .map(|l| {
            let mut v = Vec::with_capacity(k * feat.num_bins);
            for off in -radius..=radius {
                let src = (l + off).clamp(0, nf - 1) as usize;
                v.extend_from_slice(feat.frame_values(src));
            }
            v
        })
        .collect()
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

/// Featurized training set: context input vectors and clean center-frame
/// targets for every frame of every pair.
fn featurize_pairs(
    pairs: &[(AudioClip, AudioClip)],
    cfg: &DdaeConfig,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for (noisy, clean) in pairs {
        let noisy_feat = log_magnitude(&stft(noisy, &cfg.stft)?);
        let clean_feat = log_magnitude(&stft(clean, &cfg.stft)?);
        inputs.extend(featurize_context(&noisy_feat, cfg.context_frames));
        for l in 0..clean_feat.num_frames {
            targets.push(clean_feat.frame_values(l).to_vec());
        }
    }
    Ok((inputs, targets))
}

fn build_graph(cfg: &DdaeConfig, num_bins: usize, rng: &mut ChaCha8Rng) -> Result<ModelGraph> {
    let input_dim = num_bins * cfg.context_frames;
    let mut dims = vec![input_dim];
    dims.extend(std::iter::repeat_n(cfg.hidden_width, cfg.hidden_layers));
    dims.push(num_bins);
    let mut layers = Vec::new();
    for (i, w) in dims.windows(2).enumerate() {
        let act = if i + 2 == dims.len() {
            Activation::Linear // linear output layer
        } else {
            cfg.hidden_activation
        };
        layers.push(Layer::Dense(DenseLayer::glorot(w[0], w[1], act, rng)));
    }
    ModelGraph::new("ddae", DomainTag::Spectral, layers)
}

/// Trains a spectral enhancer from time-aligned noisy/clean pairs.
pub fn train_ddae(
    pairs: &[(AudioClip, AudioClip)],
    cfg: &DdaeConfig,
    tc: &TrainConfig,
) -> Result<(DdaeModel, TrainingTrace)> {
    cfg.validate()?;
    tc.validate()?;
    check_pairs(pairs)?;

    let (inputs, targets) = featurize_pairs(pairs, cfg)?;
    let input_norm = NormStats::fit(&inputs)?;
    let output_norm = NormStats::fit(&targets)?;
    let num_bins = cfg.stft.num_bins();

    let mut rng = ChaCha8Rng::seed_from_u64(tc.rng_seed);
    let mut graph = build_graph(cfg, num_bins, &mut rng)?;

    let input_tensors: Vec<Tensor> = inputs
        .iter()
        .map(|v| Tensor::vector(input_norm.normalize(v)))
        .collect();
    let target_tensors: Vec<Tensor> = targets
        .iter()
        .map(|v| Tensor::vector(output_norm.normalize(v)))
        .collect();

    let trace = run_epochs(
        &mut graph,
        &input_tensors,
        &target_tensors,
        tc,
        tc.epochs,
        &mut rng,
    )?;
    Ok((
        DdaeModel {
            graph,
            input_norm,
            output_norm,
            cfg: *cfg,
        },
        trace,
    ))
}

/// Continues training an existing model on new pairs with a fresh
/// optimizer state, reusing the model's featurization statistics.
/// `epochs` of zero leaves the parameters untouched.
pub fn continue_train_ddae(
    model: &DdaeModel,
    pairs: &[(AudioClip, AudioClip)],
    tc: &TrainConfig,
) -> Result<(DdaeModel, TrainingTrace)> {
    if !(tc.learning_rate > 0.0) || tc.batch_size < 1 || tc.l2_rho < 0.0 {
        return Err(Error::InvalidConfig("bad adaptation train config".into()));
    }
    check_pairs(pairs)?;

    let (inputs, targets) = featurize_pairs(pairs, &model.cfg)?;
    let input_tensors: Vec<Tensor> = inputs
        .iter()
        .map(|v| Tensor::vector(model.input_norm.normalize(v)))
        .collect();
    let target_tensors: Vec<Tensor> = targets
        .iter()
        .map(|v| Tensor::vector(model.output_norm.normalize(v)))
        .collect();

    let mut graph = model.graph.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(tc.rng_seed);
    let trace = run_epochs(
        &mut graph,
        &input_tensors,
        &target_tensors,
        tc,
        tc.epochs,
        &mut rng,
    )?;
    Ok((
        DdaeModel {
            graph,
            input_norm: model.input_norm.clone(),
            output_norm: model.output_norm.clone(),
            cfg: model.cfg,
        },
        trace,
    ))
}

fn run_epochs(
    graph: &mut ModelGraph,
    inputs: &[Tensor],
    targets: &[Tensor],
    tc: &TrainConfig,
    epochs: usize,
    rng: &mut ChaCha8Rng,
) -> Result<TrainingTrace> {
    let mut state = AdamState::for_model(graph);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
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

/// Enhances a clip with a trained spectral model: noisy log-magnitudes in,
/// predicted clean log-magnitudes out, resynthesis with the noisy phase.
pub fn enhance_ddae(clip: &AudioClip, model: &DdaeModel) -> Result<AudioClip> {
    if model.graph.domain_tag != DomainTag::Spectral {
        return Err(Error::DomainMismatch {
            model_domain: model.graph.domain_tag.as_str(),
            needed: "spectral",
        });
    }
    let spec = stft(clip, &model.cfg.stft)?;
    let feat = log_magnitude(&spec);
    let contexts = featurize_context(&feat, model.cfg.context_frames);

    let mut predicted = Vec::with_capacity(feat.values.len());
    for ctx in &contexts {
        let input = Tensor::vector(model.input_norm.normalize(ctx));
        let out = forward(&model.graph, &input)?;
        predicted.extend(model.output_norm.denormalize(&out.data));
    }

    let enhanced_feat = LogMagFeatures {
        values: predicted,
        phase: feat.phase.clone(),
        num_bins: feat.num_bins,
        num_frames: feat.num_frames,
        config: feat.config,
        num_samples: feat.num_samples,
    };
    let mut out = istft(&features_to_spectrogram(&enhanced_feat))?;
    out.label = clip.label.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::REQUIRED_SAMPLE_RATE;
    use rand::Rng;

    fn tone_clip(freq: f64, n: usize, amp: f64) -> AudioClip {
        AudioClip::new(
            (0..n)
                .map(|i| amp * (std::f64::consts::TAU * freq * i as f64 / 16_000.0).sin())
                .collect(),
            REQUIRED_SAMPLE_RATE,
        )
    }

    fn noisy_version(clip: &AudioClip, amp: f64, seed: u64) -> AudioClip {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AudioClip::new(
            clip.samples
                .iter()
                .map(|s| s + rng.random_range(-amp..amp))
                .collect(),
            clip.sample_rate_hz,
        )
    }

    fn small_cfg() -> DdaeConfig {
        DdaeConfig {
            hidden_layers: 2,
            hidden_width: 24,
            ..DdaeConfig::default()
        }
    }

    #[test]
    fn context_of_one_is_raw_frames() {
        let clip = tone_clip(500.0, 3000, 0.4);
        let feat = log_magnitude(&stft(&clip, &StftConfig::default()).unwrap());
        let ctx = featurize_context(&feat, 1);
        assert_eq!(ctx.len(), feat.num_frames);
        for (l, v) in ctx.iter().enumerate() {
            assert_eq!(v.as_slice(), feat.frame_values(l));
        }
    }

    #[test]
    fn edges_replicate_and_center_block_is_identity() {
        let clip = noisy_version(&tone_clip(300.0, 4000, 0.3), 0.05, 9);
        let feat = log_magnitude(&stft(&clip, &StftConfig::default()).unwrap());
        let k = 5;
        let ctx = featurize_context(&feat, k);
        let nb = feat.num_bins;
        // Frame 0: first two sub-blocks replicate frame 0.
        assert_eq!(&ctx[0][0..nb], feat.frame_values(0));
        assert_eq!(&ctx[0][nb..2 * nb], feat.frame_values(0));
        // Center block reproduces the original frame everywhere.
        for (l, v) in ctx.iter().enumerate() {
            assert_eq!(&v[2 * nb..3 * nb], feat.frame_values(l));
        }
    }

    #[test]
    fn constant_features_give_replicated_context() {
        let cfg = StftConfig::default();
        let nb = cfg.num_bins();
        let feat = LogMagFeatures {
            values: vec![0.25; nb * 4],
            phase: vec![0.0; nb * 4],
            num_bins: nb,
            num_frames: 4,
            config: cfg,
            num_samples: 1024,
        };
        let ctx = featurize_context(&feat, 3);
        for v in &ctx {
            assert_eq!(v.len(), 3 * nb);
            assert!(v.iter().all(|&x| x == 0.25));
        }
    }

    #[test]
    fn norm_stats_round_trip_is_identity() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| (0..7).map(|j| (i * 7 + j) as f64 * 0.13 - 3.0).collect())
            .collect();
        let stats = NormStats::fit(&rows).unwrap();
        assert!(stats.std.iter().all(|&s| s > 0.0));
        for r in &rows {
            let back = stats.denormalize(&stats.normalize(r));
            for (a, b) in r.iter().zip(&back) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_training_beats_untrained_feature_mse() {
        // noisy == clean: the map to learn is the identity on features.
        // A rectifier identity on d dims needs 2d hidden units, so the
        // width is set above twice the bin count.
        let pairs: Vec<(AudioClip, AudioClip)> = (0..4)
            .map(|i| {
                let c = noisy_version(&tone_clip(200.0 + 90.0 * i as f64, 3000, 0.4), 0.08, i as u64);
                (c.clone(), c)
            })
            .collect();
        let cfg = DdaeConfig {
            context_frames: 3,
            hidden_layers: 1,
            hidden_width: 160,
            stft: StftConfig {
                frame_len: 128,
                hop: 64,
                fft_size: 128,
                ..StftConfig::default()
            },
            ..DdaeConfig::default()
        };
        let tc = TrainConfig {
            epochs: 40,
            rng_seed: 5,
            ..TrainConfig::default()
        };

        let feature_mse = |model: &DdaeModel| -> f64 {
            let (inputs, targets) = featurize_pairs(&pairs, &cfg).unwrap();
            let mut total = 0.0;
            let mut count = 0usize;
            for (x, t) in inputs.iter().zip(&targets) {
                let input = Tensor::vector(model.input_norm.normalize(x));
                let out = forward(&model.graph, &input).unwrap();
                let pred = model.output_norm.denormalize(&out.data);
                total += pred
                    .iter()
                    .zip(t)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
                count += t.len();
            }
            total / count as f64
        };

        // Untrained baseline: same init, zero epochs of training.
        let (inputs, targets) = featurize_pairs(&pairs, &cfg).unwrap();
        let input_norm = NormStats::fit(&inputs).unwrap();
        let output_norm = NormStats::fit(&targets).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(tc.rng_seed);
        let untrained = DdaeModel {
            graph: build_graph(&cfg, cfg.stft.num_bins(), &mut rng).unwrap(),
            input_norm,
            output_norm,
            cfg,
        };
        let baseline = feature_mse(&untrained);

        let (trained, trace) = train_ddae(&pairs, &cfg, &tc).unwrap();
        let final_mse = feature_mse(&trained);
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
                let c = tone_clip(250.0 + 50.0 * i as f64, 1600, 0.4);
                (noisy_version(&c, 0.1, i as u64), c)
            })
            .collect();
        let cfg = small_cfg();
        let tc = TrainConfig {
            epochs: 3,
            rng_seed: 11,
            ..TrainConfig::default()
        };
        let (a, ta) = train_ddae(&pairs, &cfg, &tc).unwrap();
        let (b, tb) = train_ddae(&pairs, &cfg, &tc).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(ta.epoch_objectives, tb.epoch_objectives);
    }

    #[test]
    fn enhancement_preserves_length_and_rate() {
        let pairs = vec![(tone_clip(300.0, 2000, 0.4), tone_clip(300.0, 2000, 0.4))];
        let cfg = small_cfg();
        let tc = TrainConfig {
            epochs: 1,
            rng_seed: 1,
            ..TrainConfig::default()
        };
        let (model, _) = train_ddae(&pairs, &cfg, &tc).unwrap();
        for n in [777, 2000, 5321] {
            let clip = noisy_version(&tone_clip(400.0, n, 0.3), 0.05, 3);
            let out = enhance_ddae(&clip, &model).unwrap();
            assert_eq!(out.len(), n);
            assert_eq!(out.sample_rate_hz, clip.sample_rate_hz);
        }
    }

    #[test]
    fn mismatched_pair_lengths_rejected() {
        let pairs = vec![(tone_clip(300.0, 2000, 0.4), tone_clip(300.0, 1999, 0.4))];
        assert!(matches!(
            train_ddae(&pairs, &small_cfg(), &TrainConfig::default()),
            Err(Error::LengthMismatch { index: 0, .. })
        ));
        assert!(matches!(
            train_ddae(&[], &small_cfg(), &TrainConfig::default()),
            Err(Error::EmptyTrainingSet)
        ));
    }

    #[test]
    fn zero_epoch_adaptation_is_identity() {
        let pairs = vec![(tone_clip(300.0, 1600, 0.4), tone_clip(300.0, 1600, 0.4))];
        let cfg = small_cfg();
        let tc = TrainConfig {
            epochs: 2,
            rng_seed: 2,
            ..TrainConfig::default()
        };
        let (model, _) = train_ddae(&pairs, &cfg, &tc).unwrap();
        let (same, _) = continue_train_ddae(
            &model,
            &pairs,
            &TrainConfig {
                epochs: 0,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        assert_eq!(model.graph, same.graph);
    }
}
