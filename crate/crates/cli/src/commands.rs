//! Subcommand implementations: argument resolution (flags > config file >
//! defaults), then one library call each.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::Args;

use clearwave_core::audio::{read_wav, write_wav, AudioClip};
use clearwave_core::corpus::{
    acoustic_scene_convert, build_adaptation_pairs, fine_tune, mix_at_snr, render_manifest,
    synthesize_corpus, AdaptationMode, CorpusRecipe, MixSpec, Pairing,
};
use clearwave_core::ddae::{train_ddae, DdaeConfig};
use clearwave_core::dsp::{export_spectrogram, stft, StftConfig};
use clearwave_core::enhance::Enhancer;
use clearwave_core::fcn::{train_fcn, FcnConfig};
use clearwave_core::metrics::{build_report, score_pair, ScoredEntry};
use clearwave_core::model_file::SavedModel;
use clearwave_core::nn::{DomainTag, TrainConfig};

use crate::config::ConfigMap;
use crate::registry::ModelRegistry;
use crate::CliError;

const DEFAULT_MODELS_DIR: &str = "models";
const DEFAULT_SNR_GRID: &str = "-10,-7,-4,-1,1,4,7,10";

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Enhancement method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Mmse,
    Ddae,
    Fcn,
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mmse" => Ok(Method::Mmse),
            "ddae" => Ok(Method::Ddae),
            "fcn" => Ok(Method::Fcn),
            other => Err(format!("unknown method '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Noise,
    Speaker,
    #[value(name = "noise+speaker", alias = "noise-and-speaker")]
    NoiseAndSpeaker,
}

impl FromStr for ModeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "noise" => Ok(ModeArg::Noise),
            "speaker" => Ok(ModeArg::Speaker),
            "noise+speaker" | "noise-and-speaker" => Ok(ModeArg::NoiseAndSpeaker),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PairingArg {
    Random,
    FullCross,
}

impl FromStr for PairingArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(PairingArg::Random),
            "full-cross" | "fullcross" => Ok(PairingArg::FullCross),
            other => Err(format!("unknown pairing '{other}'")),
        }
    }
}

fn parse_snr_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad SNR value '{t}'")))
        })
        .collect()
}

/// Sorted `.wav` files directly inside `dir`.
fn wav_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "wav"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Io(format!(
            "no .wav files in {}",
            dir.display()
        )));
    }
    Ok(files)
}

/// Finds the clean file matching a processed file name: an identical name
/// in `clean_dir`, else the stem prefix before the first `__`.
fn matching_clean(clean_dir: &Path, processed: &Path) -> Option<PathBuf> {
    let name = processed.file_name()?;
    let direct = clean_dir.join(name);
    if direct.exists() {
        return Some(direct);
    }
    let stem = processed.file_stem()?.to_string_lossy();
    let prefix = stem.split("__").next()?;
    let candidate = clean_dir.join(format!("{prefix}.wav"));
    candidate.exists().then_some(candidate)
}

/// Parses the `snr<value>` token of a synthesized file name, if present.
fn snr_from_name(path: &Path) -> Option<f64> {
    let stem = path.file_stem()?.to_string_lossy();
    stem.split("__")
        .find_map(|seg| seg.strip_prefix("snr").and_then(|v| v.parse().ok()))
}

fn load_enhancer(
    method: Method,
    model: Option<&str>,
    models_dir: &Path,
) -> Result<Enhancer, CliError> {
    match method {
        Method::Mmse => Ok(Enhancer::mmse_default()),
        Method::Ddae | Method::Fcn => {
            let name = model.ok_or_else(|| {
                usage(format!(
                    "--model is required for method {:?}",
                    method
                ))
            })?;
            let registry = ModelRegistry::open(models_dir)?;
            let saved = registry.load(name)?;
            let want = match method {
                Method::Ddae => DomainTag::Spectral,
                Method::Fcn => DomainTag::Waveform,
                Method::Mmse => unreachable!(),
            };
            if saved.domain_tag() != want {
                return Err(CliError::Model(format!(
                    "model '{name}' is {}-domain, method needs {}",
                    saved.domain_tag().as_str(),
                    want.as_str()
                )));
            }
            Ok(Enhancer::from_saved(saved))
        }
    }
}

// ---- enhance ---------------------------------------------------------------

#[derive(Args)]
pub struct EnhanceArgs {
    /// Input noisy WAV.
    input: Option<PathBuf>,
    #[arg(long)]
    method: Option<Method>,
    /// Registered model name (required for ddae/fcn).
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    models_dir: Option<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

pub fn cmd_enhance(mut a: EnhanceArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    cfg.fill(&mut a.input, "input").map_err(usage)?;
    cfg.fill(&mut a.method, "method").map_err(usage)?;
    cfg.fill(&mut a.model, "model").map_err(usage)?;
    cfg.fill(&mut a.models_dir, "models_dir").map_err(usage)?;
    cfg.fill(&mut a.out, "out").map_err(usage)?;

    let input = a.input.ok_or_else(|| usage("missing input WAV"))?;
    let method = a.method.ok_or_else(|| usage("missing --method"))?;
    let out = a.out.ok_or_else(|| usage("missing --out"))?;
    let models_dir = a.models_dir.unwrap_or_else(|| DEFAULT_MODELS_DIR.into());

    let enhancer = load_enhancer(method, a.model.as_deref(), &models_dir)?;
    let clip = read_wav(&input)?;
    let start = Instant::now();
    let enhanced = enhancer.enhance(&clip)?;
    let elapsed = start.elapsed();
    write_wav(&enhanced, &out)?;
    println!(
        "{}: {:.2} s audio enhanced ({}) in {:.3} s -> {}",
        input.display(),
        clip.duration_s(),
        enhancer.method_name(),
        elapsed.as_secs_f64(),
        out.display()
    );
    Ok(())
}

// ---- train -----------------------------------------------------------------

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    noisy_dir: Option<PathBuf>,
    #[arg(long)]
    clean_dir: Option<PathBuf>,
    #[arg(long)]
    method: Option<Method>,
    /// Name to register the trained model under.
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    models_dir: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    l2_rho: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Spectral model: context frames (odd).
    #[arg(long)]
    context: Option<usize>,
    #[arg(long)]
    hidden_layers: Option<usize>,
    #[arg(long)]
    hidden_width: Option<usize>,
    /// Waveform model: conv layer count.
    #[arg(long)]
    fcn_layers: Option<usize>,
    #[arg(long)]
    fcn_filters: Option<usize>,
    #[arg(long)]
    fcn_filter_len: Option<usize>,
    #[arg(long, action = clap::ArgAction::SetTrue)]
    overwrite: Option<bool>,
}

/// Pairs each noisy file with its clean counterpart and loads both.
fn load_pairs(noisy_dir: &Path, clean_dir: &Path) -> Result<Vec<(AudioClip, AudioClip)>, CliError> {
    let mut pairs = Vec::new();
    for noisy_path in wav_files(noisy_dir)? {
        let clean_path = matching_clean(clean_dir, &noisy_path).ok_or_else(|| {
            CliError::Io(format!(
                "no clean file in {} matching {}",
                clean_dir.display(),
                noisy_path.display()
            ))
        })?;
        pairs.push((read_wav(&noisy_path)?, read_wav(&clean_path)?));
    }
    Ok(pairs)
}

fn train_config(a: &TrainArgs) -> TrainConfig {
    let d = TrainConfig::default();
    TrainConfig {
        epochs: a.epochs.unwrap_or(d.epochs),
        batch_size: a.batch_size.unwrap_or(d.batch_size),
        learning_rate: a.learning_rate.unwrap_or(d.learning_rate),
        l2_rho: a.l2_rho.unwrap_or(d.l2_rho),
        rng_seed: a.seed.unwrap_or(d.rng_seed),
        ..d
    }
}

pub fn cmd_train(mut a: TrainArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    for (slot, key) in [
        (&mut a.noisy_dir, "noisy_dir"),
        (&mut a.clean_dir, "clean_dir"),
        (&mut a.models_dir, "models_dir"),
    ] {
        cfg.fill(slot, key).map_err(usage)?;
    }
    cfg.fill(&mut a.method, "method").map_err(usage)?;
    cfg.fill(&mut a.name, "name").map_err(usage)?;
    cfg.fill(&mut a.epochs, "epochs").map_err(usage)?;
    cfg.fill(&mut a.batch_size, "batch_size").map_err(usage)?;
    cfg.fill(&mut a.learning_rate, "learning_rate").map_err(usage)?;
    cfg.fill(&mut a.l2_rho, "l2_rho").map_err(usage)?;
    cfg.fill(&mut a.seed, "seed").map_err(usage)?;
    cfg.fill(&mut a.context, "context").map_err(usage)?;
    cfg.fill(&mut a.hidden_layers, "hidden_layers").map_err(usage)?;
    cfg.fill(&mut a.hidden_width, "hidden_width").map_err(usage)?;
    cfg.fill(&mut a.fcn_layers, "fcn_layers").map_err(usage)?;
    cfg.fill(&mut a.fcn_filters, "fcn_filters").map_err(usage)?;
    cfg.fill(&mut a.fcn_filter_len, "fcn_filter_len").map_err(usage)?;
    cfg.fill(&mut a.overwrite, "overwrite").map_err(usage)?;

    let noisy_dir = a.noisy_dir.clone().ok_or_else(|| usage("missing --noisy-dir"))?;
    let clean_dir = a.clean_dir.clone().ok_or_else(|| usage("missing --clean-dir"))?;
    let method = a.method.ok_or_else(|| usage("missing --method"))?;
    let name = a.name.clone().ok_or_else(|| usage("missing --name"))?;
    let models_dir = a
        .models_dir
        .clone()
        .unwrap_or_else(|| DEFAULT_MODELS_DIR.into());

    let pairs = load_pairs(&noisy_dir, &clean_dir)?;
    let tc = train_config(&a);
    let start = Instant::now();
    let (model, trace) = match method {
        Method::Ddae => {
            let d = DdaeConfig::default();
            let ddae_cfg = DdaeConfig {
                context_frames: a.context.unwrap_or(d.context_frames),
                hidden_layers: a.hidden_layers.unwrap_or(d.hidden_layers),
                hidden_width: a.hidden_width.unwrap_or(d.hidden_width),
                ..d
            };
            let (m, trace) = train_ddae(&pairs, &ddae_cfg, &tc)?;
            (SavedModel::Spectral(m), trace)
        }
        Method::Fcn => {
            let d = FcnConfig::default();
            let fcn_cfg = FcnConfig {
                num_layers: a.fcn_layers.unwrap_or(d.num_layers),
                filters_per_layer: a.fcn_filters.unwrap_or(d.filters_per_layer),
                filter_len: a.fcn_filter_len.unwrap_or(d.filter_len),
                ..d
            };
            let (m, trace) = train_fcn(&pairs, &fcn_cfg, &tc)?;
            (SavedModel::Waveform(m), trace)
        }
        Method::Mmse => return Err(usage("mmse has no trainable model")),
    };

    let registry = ModelRegistry::open(&models_dir)?;
    registry.register(&model, &name, None, a.overwrite.unwrap_or(false))?;
    println!(
        "trained '{}' on {} pairs, {} epochs in {:.1} s (final objective {:.6}) -> {}",
        name,
        pairs.len(),
        tc.epochs,
        start.elapsed().as_secs_f64(),
        trace.epoch_objectives.last().copied().unwrap_or(f64::NAN),
        registry.model_path(&name).display()
    );
    Ok(())
}

// ---- adapt -----------------------------------------------------------------

#[derive(Args)]
pub struct AdaptArgs {
    #[arg(long)]
    mode: Option<ModeArg>,
    /// Recorded noise WAV (noise and noise+speaker modes).
    #[arg(long)]
    noise: Option<PathBuf>,
    /// Directory of recorded speaker WAVs (speaker modes).
    #[arg(long)]
    speech_dir: Option<PathBuf>,
    /// Base model name in the registry.
    #[arg(long)]
    base: Option<String>,
    /// Name for the adapted model.
    #[arg(long)]
    name: Option<String>,
    /// Clean training clips used by noise mode.
    #[arg(long)]
    cleans_dir: Option<PathBuf>,
    /// Training noises used by speaker mode.
    #[arg(long)]
    noises_dir: Option<PathBuf>,
    /// Comma-separated adaptation SNRs (dB).
    #[arg(long, allow_hyphen_values = true)]
    snrs: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    models_dir: Option<PathBuf>,
    #[arg(long, action = clap::ArgAction::SetTrue)]
    overwrite: Option<bool>,
}

pub fn cmd_adapt(mut a: AdaptArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    cfg.fill(&mut a.mode, "mode").map_err(usage)?;
    for (slot, key) in [
        (&mut a.noise, "noise"),
        (&mut a.speech_dir, "speech_dir"),
        (&mut a.cleans_dir, "cleans_dir"),
        (&mut a.noises_dir, "noises_dir"),
        (&mut a.models_dir, "models_dir"),
    ] {
        cfg.fill(slot, key).map_err(usage)?;
    }
    cfg.fill(&mut a.base, "base").map_err(usage)?;
    cfg.fill(&mut a.name, "name").map_err(usage)?;
    cfg.fill(&mut a.snrs, "snrs").map_err(usage)?;
    cfg.fill(&mut a.epochs, "epochs").map_err(usage)?;
    cfg.fill(&mut a.seed, "seed").map_err(usage)?;
    cfg.fill(&mut a.overwrite, "overwrite").map_err(usage)?;

    let mode = a.mode.ok_or_else(|| usage("missing --mode"))?;
    let base = a.base.ok_or_else(|| usage("missing --base"))?;
    let name = a.name.ok_or_else(|| usage("missing --name"))?;
    let models_dir = a
        .models_dir
        .unwrap_or_else(|| DEFAULT_MODELS_DIR.into());
    let snrs = parse_snr_list(&a.snrs.unwrap_or_else(|| DEFAULT_SNR_GRID.into()))?;
    let seed = a.seed.unwrap_or(0);

    let recorded_noise = a.noise.as_deref().map(read_wav).transpose()?;
    let recorded_speech: Option<Vec<AudioClip>> = match a.speech_dir.as_deref() {
        Some(dir) => Some(
            wav_files(dir)?
                .iter()
                .map(read_wav)
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let base_cleans: Vec<AudioClip> = match a.cleans_dir.as_deref() {
        Some(dir) => wav_files(dir)?
            .iter()
            .map(read_wav)
            .collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    let base_noises: Vec<AudioClip> = match a.noises_dir.as_deref() {
        Some(dir) => wav_files(dir)?
            .iter()
            .map(read_wav)
            .collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };

    let registry = ModelRegistry::open(&models_dir)?;
    let base_model = registry.load(&base)?;
    let pairs = build_adaptation_pairs(
        match mode {
            ModeArg::Noise => AdaptationMode::Noise,
            ModeArg::Speaker => AdaptationMode::Speaker,
            ModeArg::NoiseAndSpeaker => AdaptationMode::NoiseAndSpeaker,
        },
        recorded_noise.as_ref(),
        recorded_speech.as_deref(),
        &base_cleans,
        &base_noises,
        &snrs,
        seed,
    )?;

    let mut tc = clearwave_core::corpus::adaptation_train_config(seed);
    if let Some(e) = a.epochs {
        tc.epochs = e;
    }
    let start = Instant::now();
    let (adapted, trace) = fine_tune(&base_model, &pairs, &tc, &name)?;
    registry.register(&adapted, &name, Some(&base), a.overwrite.unwrap_or(false))?;
    println!(
        "adapted '{base}' -> '{name}' on {} pairs, {} epochs in {:.1} s (final objective {:.6})",
        pairs.len(),
        tc.epochs,
        start.elapsed().as_secs_f64(),
        trace.epoch_objectives.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

// ---- convert ---------------------------------------------------------------

#[derive(Args)]
pub struct ConvertArgs {
    /// Input (noisy) WAV.
    input: Option<PathBuf>,
    /// New background noise WAV.
    #[arg(long)]
    noise: Option<PathBuf>,
    /// Target SNR (dB) of the converted scene; `inf` means no noise.
    #[arg(long, allow_negative_numbers = true)]
    snr: Option<f64>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    models_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

pub fn cmd_convert(mut a: ConvertArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    cfg.fill(&mut a.input, "input").map_err(usage)?;
    cfg.fill(&mut a.noise, "noise").map_err(usage)?;
    cfg.fill(&mut a.snr, "snr").map_err(usage)?;
    cfg.fill(&mut a.method, "method").map_err(usage)?;
    cfg.fill(&mut a.model, "model").map_err(usage)?;
    cfg.fill(&mut a.models_dir, "models_dir").map_err(usage)?;
    cfg.fill(&mut a.seed, "seed").map_err(usage)?;
    cfg.fill(&mut a.out, "out").map_err(usage)?;

    let input = a.input.ok_or_else(|| usage("missing input WAV"))?;
    let noise_path = a.noise.ok_or_else(|| usage("missing --noise"))?;
    let snr = a.snr.ok_or_else(|| usage("missing --snr"))?;
    let method = a.method.ok_or_else(|| usage("missing --method"))?;
    let out = a.out.ok_or_else(|| usage("missing --out"))?;
    let models_dir = a.models_dir.unwrap_or_else(|| DEFAULT_MODELS_DIR.into());

    let enhancer = load_enhancer(method, a.model.as_deref(), &models_dir)?;
    let clip = read_wav(&input)?;
    let noise = read_wav(&noise_path)?;
    let spec = MixSpec {
        snr_db: snr,
        noise_label: noise.label.clone().unwrap_or_default(),
        seed: a.seed.unwrap_or(0),
    };
    let result = acoustic_scene_convert(&clip, &enhancer, &noise, &spec)?;
    write_wav(&result.converted, &out)?;
    println!(
        "converted {} to scene '{}' at {} dB -> {}",
        input.display(),
        spec.noise_label,
        snr,
        out.display()
    );
    Ok(())
}

// ---- mix -------------------------------------------------------------------

#[derive(Args)]
pub struct MixArgs {
    #[arg(long)]
    clean: Option<PathBuf>,
    #[arg(long)]
    noise: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    snr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

pub fn cmd_mix(mut a: MixArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    cfg.fill(&mut a.clean, "clean").map_err(usage)?;
    cfg.fill(&mut a.noise, "noise").map_err(usage)?;
    cfg.fill(&mut a.snr, "snr").map_err(usage)?;
    cfg.fill(&mut a.seed, "seed").map_err(usage)?;
    cfg.fill(&mut a.out, "out").map_err(usage)?;

    let clean_path = a.clean.ok_or_else(|| usage("missing --clean"))?;
    let noise_path = a.noise.ok_or_else(|| usage("missing --noise"))?;
    let snr = a.snr.ok_or_else(|| usage("missing --snr"))?;
    let out = a.out.ok_or_else(|| usage("missing --out"))?;

    let clean = read_wav(&clean_path)?;
    let noise = read_wav(&noise_path)?;
    let spec = MixSpec {
        snr_db: snr,
        noise_label: noise.label.clone().unwrap_or_default(),
        seed: a.seed.unwrap_or(0),
    };
    let mixture = mix_at_snr(&clean, &noise, &spec)?;
    write_wav(&mixture.noisy, &out)?;
    println!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}",
        clean_path.display(),
        noise_path.display(),
        snr,
        spec.seed,
        mixture.noise_offset,
        mixture.rescale,
        out.display()
    );
    Ok(())
}

// ---- synth -----------------------------------------------------------------

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long)]
    cleans_dir: Option<PathBuf>,
    #[arg(long)]
    noises_dir: Option<PathBuf>,
    /// Comma-separated SNR levels (dB).
    #[arg(long, allow_hyphen_values = true)]
    snrs: Option<String>,
    #[arg(long)]
    pairing: Option<PairingArg>,
    /// Noise draws per (clean, SNR) cell under random pairing.
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

pub fn cmd_synth(mut a: SynthArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    cfg.fill(&mut a.cleans_dir, "cleans_dir").map_err(usage)?;
    cfg.fill(&mut a.noises_dir, "noises_dir").map_err(usage)?;
    cfg.fill(&mut a.snrs, "snrs").map_err(usage)?;
    cfg.fill(&mut a.pairing, "pairing").map_err(usage)?;
    cfg.fill(&mut a.draws, "draws").map_err(usage)?;
    cfg.fill(&mut a.seed, "seed").map_err(usage)?;
    cfg.fill(&mut a.out, "out").map_err(usage)?;

    let cleans_dir = a.cleans_dir.ok_or_else(|| usage("missing --cleans-dir"))?;
    let noises_dir = a.noises_dir.ok_or_else(|| usage("missing --noises-dir"))?;
    let snrs = parse_snr_list(&a.snrs.ok_or_else(|| usage("missing --snrs"))?)?;
    let out_dir = a.out.ok_or_else(|| usage("missing --out"))?;

    let clean_clips = wav_files(&cleans_dir)?
        .iter()
        .map(read_wav)
        .collect::<Result<Vec<_>, _>>()?;
    let noise_clips = wav_files(&noises_dir)?
        .iter()
        .map(read_wav)
        .collect::<Result<Vec<_>, _>>()?;

    let recipe = CorpusRecipe {
        clean_clips,
        noise_clips,
        snr_levels: snrs,
        pairing: match a.pairing.unwrap_or(PairingArg::Random) {
            PairingArg::Random => Pairing::RandomNoisePerUtterance,
            PairingArg::FullCross => Pairing::FullCross,
        },
        draws_per_cell: a.draws.unwrap_or(1),
        seed: a.seed.unwrap_or(0),
    };
    let pairs = synthesize_corpus(&recipe)?;

    let noisy_dir = out_dir.join("noisy");
    std::fs::create_dir_all(&noisy_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", noisy_dir.display())))?;
    let mut rows = Vec::with_capacity(pairs.len());
    for pair in &pairs {
        write_wav(
            &pair.noisy,
            noisy_dir.join(format!("{}.wav", pair.manifest.output_path)),
        )?;
        rows.push(pair.manifest.clone());
    }
    let manifest_path = out_dir.join("manifest.tsv");
    std::fs::write(&manifest_path, render_manifest(&rows))
        .map_err(|e| CliError::Io(format!("cannot write manifest: {e}")))?;
    println!(
        "synthesized {} pairs into {} (manifest: {})",
        pairs.len(),
        noisy_dir.display(),
        manifest_path.display()
    );
    Ok(())
}

// ---- eval ------------------------------------------------------------------

#[derive(Args)]
pub struct EvalArgs {
    /// Directory of clean reference WAVs.
    #[arg(long)]
    clean_dir: Option<PathBuf>,
    /// Directory with one subdirectory of processed WAVs per method.
    #[arg(long)]
    proc_dir: Option<PathBuf>,
    /// Pre-computed scores CSV: method,snr_db,stoi,segsnr.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Baseline method for relative improvements.
    #[arg(long)]
    baseline: Option<String>,
    /// Output CSV path (stdout when omitted).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Also print the aligned text table.
    #[arg(long, action = clap::ArgAction::SetTrue)]
    text: Option<bool>,
}

fn parse_scores_csv(path: &Path) -> Result<Vec<ScoredEntry>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("method,snr_db,stoi,segsnr") => {}
        other => {
            return Err(usage(format!(
                "scores file must start with 'method,snr_db,stoi,segsnr', got {other:?}"
            )))
        }
    }
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(usage(format!("scores line {}: expected 4 fields", i + 2)));
        }
        let snr_db = if fields[1].is_empty() {
            None
        } else {
            Some(
                fields[1]
                    .parse()
                    .map_err(|_| usage(format!("bad snr '{}'", fields[1])))?,
            )
        };
        entries.push(ScoredEntry {
            method: fields[0].to_string(),
            snr_db,
            stoi: fields[2]
                .parse()
                .map_err(|_| usage(format!("bad stoi '{}'", fields[2])))?,
            segsnr_db: fields[3]
                .parse()
                .map_err(|_| usage(format!("bad segsnr '{}'", fields[3])))?,
        });
    }
    Ok(entries)
}

fn score_directories(clean_dir: &Path, proc_dir: &Path) -> Result<Vec<ScoredEntry>, CliError> {
    let mut methods: Vec<PathBuf> = std::fs::read_dir(proc_dir)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", proc_dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    methods.sort();
    if methods.is_empty() {
        return Err(CliError::Io(format!(
            "no method subdirectories in {}",
            proc_dir.display()
        )));
    }
    let mut entries = Vec::new();
    for method_dir in methods {
        let method = method_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        for proc_path in wav_files(&method_dir)? {
            let clean_path = matching_clean(clean_dir, &proc_path).ok_or_else(|| {
                CliError::Io(format!(
                    "no clean file matching {}",
                    proc_path.display()
                ))
            })?;
            let clean = read_wav(&clean_path)?;
            let processed = read_wav(&proc_path)?;
            entries.push(score_pair(
                method.clone(),
                snr_from_name(&proc_path),
                &clean,
                &processed,
            )?);
        }
    }
    Ok(entries)
}

pub fn cmd_eval(mut a: EvalArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    cfg.fill(&mut a.clean_dir, "clean_dir").map_err(usage)?;
    cfg.fill(&mut a.proc_dir, "proc_dir").map_err(usage)?;
    cfg.fill(&mut a.scores, "scores").map_err(usage)?;
    cfg.fill(&mut a.baseline, "baseline").map_err(usage)?;
    cfg.fill(&mut a.out, "out").map_err(usage)?;
    cfg.fill(&mut a.text, "text").map_err(usage)?;

    let entries = match (&a.scores, &a.clean_dir, &a.proc_dir) {
        (Some(scores), _, _) => parse_scores_csv(scores)?,
        (None, Some(clean), Some(proc)) => score_directories(clean, proc)?,
        _ => {
            return Err(usage(
                "need either --scores or both --clean-dir and --proc-dir",
            ))
        }
    };
    let report = build_report(&entries, a.baseline.as_deref())?;
    let csv = report.render_csv();
    match &a.out {
        Some(path) => std::fs::write(path, &csv)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    if a.text.unwrap_or(false) {
        print!("{}", report.render_text());
    }
    Ok(())
}

// ---- spectrogram -----------------------------------------------------------

#[derive(Args)]
pub struct SpectrogramArgs {
    input: Option<PathBuf>,
    /// Output raster path (.pgm); a dB CSV lands next to it.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

pub fn cmd_spectrogram(mut a: SpectrogramArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    cfg.fill(&mut a.input, "input").map_err(usage)?;
    cfg.fill(&mut a.out, "out").map_err(usage)?;
    let input = a.input.ok_or_else(|| usage("missing input WAV"))?;
    let out = a.out.ok_or_else(|| usage("missing --out"))?;

    let clip = read_wav(&input)?;
    let spec = stft(&clip, &StftConfig::default())?;
    export_spectrogram(&spec, &out)?;
    println!(
        "spectrogram of {} ({} bins x {} frames) -> {}",
        input.display(),
        spec.num_bins(),
        spec.num_frames(),
        out.display()
    );
    Ok(())
}
