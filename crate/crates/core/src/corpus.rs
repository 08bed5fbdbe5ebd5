//! SNR-controlled mixing, corpus synthesis with a replayable manifest,
//! acoustic scene conversion, and adaptation-pair construction plus
//! fine-tuning.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audio::AudioClip;
use crate::ddae::{continue_train_ddae, TrainingTrace};
use crate::enhance::Enhancer;
use crate::error::{Error, Result};
use crate::fcn::continue_train_fcn;
use crate::model_file::SavedModel;
use crate::nn::TrainConfig;

/// One mixing request: target SNR, an identifying noise label, and the
/// seed that fixes the noise segment choice.
#[derive(Debug, Clone, PartialEq)]
pub struct MixSpec {
    pub snr_db: f64,
    pub noise_label: String,
    pub seed: u64,
}

/// A finished mixture with the metadata needed to reproduce it exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub noisy: AudioClip,
    /// Start offset into the noise clip (cyclic when the noise is shorter
    /// than the speech).
    pub noise_offset: usize,
    /// Gain applied to the noise to hit the target SNR.
    pub noise_gain: f64,
    /// Global factor applied after summing when the peak reached 1.0.
    pub rescale: f64,
}

/// SplitMix64, used to derive independent per-pair seeds from one corpus
/// seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fits `noise` to `len` samples: a seeded random offset with truncation
/// when the noise is long enough, cyclic tiling from a seeded offset
/// otherwise.
fn fit_noise(noise: &AudioClip, len: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, usize) {
    let n = noise.len();
    if n >= len {
        let offset = rng.random_range(0..=(n - len));
        (noise.samples[offset..offset + len].to_vec(), offset)
    } else {
        let offset = rng.random_range(0..n);
        let fitted = (0..len).map(|i| noise.samples[(offset + i) % n]).collect();
        (fitted, offset)
    }
}

fn mean_square(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64
}

/// Mixes speech with noise at an exact component SNR
/// (`10*log10(P_s / (g^2 P_v)) == snr_db`, powers as full-utterance mean
/// squares). `snr_db == +inf` is the zero-noise sentinel. If the summed
/// peak reaches 1.0 the output is rescaled to peak 0.99, which preserves
/// the component SNR.
pub fn mix_at_snr(speech: &AudioClip, noise: &AudioClip, spec: &MixSpec) -> Result<Mixture> {
    speech.validate("mix speech")?;
    let p_speech = mean_square(&speech.samples);
    if p_speech == 0.0 {
        return Err(Error::SilentSpeech);
    }

    if spec.snr_db.is_infinite() && spec.snr_db > 0.0 {
        return Ok(Mixture {
            noisy: speech.clone(),
            noise_offset: 0,
            noise_gain: 0.0,
            rescale: 1.0,
        });
    }
    if !spec.snr_db.is_finite() {
        return Err(Error::InvalidConfig(format!("bad snr {}", spec.snr_db)));
    }

    noise.validate("mix noise")?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (fitted, noise_offset) = fit_noise(noise, speech.len(), &mut rng);
    let p_noise = mean_square(&fitted);
    if p_noise == 0.0 {
        return Err(Error::SilentNoise);
    }

    let gain = (p_speech / (p_noise * 10f64.powf(spec.snr_db / 10.0))).sqrt();
    let mut samples: Vec<f64> = speech
        .samples
        .iter()
        .zip(&fitted)
        .map(|(s, v)| s + gain * v)
        .collect();
    let peak = samples.iter().fold(0.0f64, |a, &s| a.max(s.abs()));
    let rescale = if peak >= 1.0 { 0.99 / peak } else { 1.0 };
    if rescale != 1.0 {
        for s in samples.iter_mut() {
            *s *= rescale;
        }
    }

    let mut noisy = AudioClip::new(samples, speech.sample_rate_hz);
    noisy.label = speech.label.clone();
    Ok(Mixture {
        noisy,
        noise_offset,
        noise_gain: gain,
        rescale,
    })
}

/// How clean clips are paired with noises during synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// One seeded random noise type per (clean, SNR, draw) cell.
    RandomNoisePerUtterance,
    /// Every (clean, noise, SNR) triple.
    FullCross,
}

/// Inputs of a corpus synthesis run.
#[derive(Debug, Clone)]
pub struct CorpusRecipe {
    pub clean_clips: Vec<AudioClip>,
    pub noise_clips: Vec<AudioClip>,
    pub snr_levels: Vec<f64>,
    pub pairing: Pairing,
    /// Noise draws per (clean, SNR) cell under random pairing.
    pub draws_per_cell: usize,
    pub seed: u64,
}

impl CorpusRecipe {
    fn validate(&self) -> Result<()> {
        if self.clean_clips.is_empty() {
            return Err(Error::EmptyRecipe("no clean clips".into()));
        }
        if self.noise_clips.is_empty() {
            return Err(Error::EmptyRecipe("no noise clips".into()));
        }
        if self.snr_levels.is_empty() {
            return Err(Error::EmptyRecipe("no SNR levels".into()));
        }
        if self.draws_per_cell == 0 {
            return Err(Error::EmptyRecipe("draws_per_cell is zero".into()));
        }
        let mut sorted = self.snr_levels.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::EmptyRecipe("duplicate SNR level".into()));
        }
        Ok(())
    }
}

/// One synthesized pair, indexed back into the recipe lists.
#[derive(Debug, Clone)]
pub struct CorpusPair {
    pub noisy: AudioClip,
    pub clean_idx: usize,
    pub noise_idx: usize,
    pub snr_db: f64,
    pub manifest: ManifestRow,
}

/// One manifest line; the mixture is reconstructible from these fields
/// alone.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub clean_path: String,
    pub noise_path: String,
    pub snr_db: f64,
    pub seed: u64,
    pub noise_offset: usize,
    pub rescale_factor: f64,
    pub output_path: String,
}

pub const MANIFEST_HEADER: &str =
    "clean_path\tnoise_path\tsnr_db\tseed\tnoise_offset\trescale_factor\toutput_path";

/// Renders manifest rows as tab-separated text with the fixed header.
pub fn render_manifest(rows: &[ManifestRow]) -> String {
    let mut out = String::from(MANIFEST_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.clean_path, r.noise_path, r.snr_db, r.seed, r.noise_offset, r.rescale_factor, r.output_path
        ));
    }
    out
}

/// Parses manifest text produced by [`render_manifest`].
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == MANIFEST_HEADER => {}
        _ => {
            return Err(Error::InvalidConfig(
                "manifest missing the fixed header line".into(),
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 {
            return Err(Error::InvalidConfig(format!(
                "manifest line {} has {} fields, expected 7",
                i + 2,
                fields.len()
            )));
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::InvalidConfig(format!("bad {what} '{s}' in manifest")))
        };
        rows.push(ManifestRow {
            clean_path: fields[0].to_string(),
            noise_path: fields[1].to_string(),
            snr_db: parse_f(fields[2], "snr_db")?,
            seed: fields[3]
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad seed '{}'", fields[3])))?,
            noise_offset: fields[4]
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad offset '{}'", fields[4])))?,
            rescale_factor: parse_f(fields[5], "rescale_factor")?,
            output_path: fields[6].to_string(),
        });
    }
    Ok(rows)
}

fn clip_id(clip: &AudioClip, prefix: &str, idx: usize) -> String {
    clip.label.clone().unwrap_or_else(|| format!("{prefix}{idx}"))
}

/// Synthesizes noisy/clean pairs per the recipe. Under random pairing each
/// (clean, SNR, draw) cell gets one seeded noise type; under full cross
/// every (clean, noise, SNR) triple is emitted.
pub fn synthesize_corpus(recipe: &CorpusRecipe) -> Result<Vec<CorpusPair>> {
    recipe.validate()?;
    let mut pairs = Vec::new();
    let mut pair_index = 0u64;
    for ci in 0..recipe.clean_clips.len() {
        for &snr in &recipe.snr_levels {
            for draw in 0..recipe.draws_per_cell {
                match recipe.pairing {
                    Pairing::RandomNoisePerUtterance => {
                        let cell_seed = derive_seed(recipe.seed, pair_index);
                        let mut cell_rng = ChaCha8Rng::seed_from_u64(cell_seed);
                        let ni = cell_rng.random_range(0..recipe.noise_clips.len());
                        let mix_seed = derive_seed(cell_seed, 1);
                        pairs.push(make_pair(recipe, ci, ni, snr, draw, mix_seed)?);
                        pair_index += 1;
                    }
                    Pairing::FullCross => {
                        for ni in 0..recipe.noise_clips.len() {
                            let mix_seed = derive_seed(recipe.seed, pair_index);
                            pairs.push(make_pair(recipe, ci, ni, snr, draw, mix_seed)?);
                            pair_index += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(pairs)
}

fn make_pair(
    recipe: &CorpusRecipe,
    clean_idx: usize,
    noise_idx: usize,
    snr_db: f64,
    draw: usize,
    mix_seed: u64,
) -> Result<CorpusPair> {
    let clean = &recipe.clean_clips[clean_idx];
    let noise = &recipe.noise_clips[noise_idx];
    let clean_id = clip_id(clean, "clean", clean_idx);
    let noise_id = clip_id(noise, "noise", noise_idx);
    let spec = MixSpec {
        snr_db,
        noise_label: noise_id.clone(),
        seed: mix_seed,
    };
    let mixture = mix_at_snr(clean, noise, &spec)?;
    let output_id = format!("{clean_id}__{noise_id}__snr{snr_db}__d{draw}");
    let manifest = ManifestRow {
        clean_path: clean_id,
        noise_path: noise_id,
        snr_db,
        seed: mix_seed,
        noise_offset: mixture.noise_offset,
        rescale_factor: mixture.rescale,
        output_path: output_id,
    };
    Ok(CorpusPair {
        noisy: mixture.noisy,
        clean_idx,
        noise_idx,
        snr_db,
        manifest,
    })
}

/// Result of an acoustic scene conversion.
#[derive(Debug, Clone)]
pub struct SceneConversion {
    /// Speech after enhancement, before remixing.
    pub enhanced: AudioClip,
    /// Enhanced speech mixed with the new background at the target SNR.
    pub converted: AudioClip,
    pub noise_offset: usize,
    pub noise_gain: f64,
    pub rescale: f64,
}

/// Enhance, then remix with a new background noise at the requested SNR:
/// exactly `mix_at_snr(enhance(input), new_noise, spec)`.
pub fn acoustic_scene_convert(
    input: &AudioClip,
    enhancer: &Enhancer,
    new_noise: &AudioClip,
    spec: &MixSpec,
) -> Result<SceneConversion> {
    let enhanced = enhancer.enhance(input)?;
    let mixture = mix_at_snr(&enhanced, new_noise, spec)?;
    Ok(SceneConversion {
        enhanced,
        converted: mixture.noisy,
        noise_offset: mixture.noise_offset,
        noise_gain: mixture.noise_gain,
        rescale: mixture.rescale,
    })
}

/// Which recordings drive an adaptation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptationMode {
    Noise,
    Speaker,
    NoiseAndSpeaker,
}

impl AdaptationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AdaptationMode::Noise => "noise",
            AdaptationMode::Speaker => "speaker",
            AdaptationMode::NoiseAndSpeaker => "noise+speaker",
        }
    }
}

/// Builds adaptation pairs for the chosen mode:
/// noise mode mixes training cleans with the recorded noise; speaker mode
/// mixes recorded speaker speech with the training noises; the combined
/// mode mixes recorded speech with the recorded noise. All crosses run
/// over `snr_levels` with seeded offsets.
pub fn build_adaptation_pairs(
    mode: AdaptationMode,
    recorded_noise: Option<&AudioClip>,
    recorded_speech: Option<&[AudioClip]>,
    base_cleans: &[AudioClip],
    base_noises: &[AudioClip],
    snr_levels: &[f64],
    seed: u64,
) -> Result<Vec<(AudioClip, AudioClip)>> {
    let missing = |detail: &str| Error::MissingRecording {
        mode: mode.as_str(),
        detail: detail.to_string(),
    };
    let (speech_side, noise_side): (Vec<&AudioClip>, Vec<&AudioClip>) = match mode {
        AdaptationMode::Noise => {
            let noise = recorded_noise.ok_or_else(|| missing("recorded noise required"))?;
            if base_cleans.is_empty() {
                return Err(Error::EmptyRecipe("no base clean clips".into()));
            }
            (base_cleans.iter().collect(), vec![noise])
        }
        AdaptationMode::Speaker => {
            let speech = recorded_speech.ok_or_else(|| missing("recorded speech required"))?;
            if speech.is_empty() {
                return Err(missing("recorded speech list is empty"));
            }
            if base_noises.is_empty() {
                return Err(Error::EmptyRecipe("no base noise clips".into()));
            }
            (speech.iter().collect(), base_noises.iter().collect())
        }
        AdaptationMode::NoiseAndSpeaker => {
            let noise = recorded_noise.ok_or_else(|| missing("recorded noise required"))?;
            let speech = recorded_speech.ok_or_else(|| missing("recorded speech required"))?;
            if speech.is_empty() {
                return Err(missing("recorded speech list is empty"));
            }
            (speech.iter().collect(), vec![noise])
        }
    };
    if snr_levels.is_empty() {
        return Err(Error::EmptyRecipe("no SNR levels".into()));
    }

    let mut pairs = Vec::new();
    let mut index = 0u64;
    for clean in &speech_side {
        for noise in &noise_side {
            for &snr in snr_levels {
                let spec = MixSpec {
                    snr_db: snr,
                    noise_label: clip_id(noise, "noise", 0),
                    seed: derive_seed(seed, index),
                };
                let mixture = mix_at_snr(clean, noise, &spec)?;
                pairs.push((mixture.noisy, (*clean).clone()));
                index += 1;
            }
        }
    }
    Ok(pairs)
}

/// Continues training a saved model on adaptation pairs with a fresh
/// optimizer state, returning the adapted model under a new name. The
/// input model is untouched.
pub fn fine_tune(
    model: &SavedModel,
    pairs: &[(AudioClip, AudioClip)],
    tc: &TrainConfig,
    new_name: &str,
) -> Result<(SavedModel, TrainingTrace)> {
    match model {
        SavedModel::Spectral(m) => {
            let (adapted, trace) = continue_train_ddae(m, pairs, tc)?;
            Ok((SavedModel::Spectral(adapted).with_name(new_name), trace))
        }
        SavedModel::Waveform(g) => {
            let (adapted, trace) = continue_train_fcn(g, pairs, tc)?;
            Ok((SavedModel::Waveform(adapted).with_name(new_name), trace))
        }
    }
}

/// Adaptation-time defaults: a short fine-tuning budget.
pub fn adaptation_train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 10,
        rng_seed: seed,
        ..TrainConfig::default()
    }
}
