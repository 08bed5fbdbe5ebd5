//! Traditional gain-function speech enhancement: noise PSD estimation,
//! decision-directed a priori SNR tracking, and a Wiener-form gain
//! `G = xi / (1 + xi)` applied per bin.

use crate::audio::AudioClip;
use crate::dsp::{istft, stft, Spectrogram, StftConfig};
use crate::error::{Error, Result};

/// Floor applied to the noise PSD denominator.
const PSD_FLOOR: f64 = 1e-20;

/// Free constants of the noise tracker and SNR estimator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GainConfig {
    /// Decision-directed smoothing factor in `[0, 1)`.
    pub dd_alpha: f64,
    /// Lower clamp on the gain.
    pub gain_floor: f64,
    /// Leading frames assumed noise-only when initializing the PSD.
    pub init_frames: usize,
    /// Recursive smoothing factor of PSD updates.
    pub noise_update_beta: f64,
    /// A posteriori SNR (dB) below which a bin's PSD keeps updating.
    pub update_threshold_db: f64,
}

impl Default for GainConfig {
    fn default() -> Self {
        GainConfig {
            dd_alpha: 0.98,
            gain_floor: 0.1,
            init_frames: 6,
            noise_update_beta: 0.9,
            update_threshold_db: 3.0,
        }
    }
}

impl GainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..1.0).contains(&self.dd_alpha)
            && (0.0..=1.0).contains(&self.gain_floor)
            && self.init_frames > 0
            && (0.0..1.0).contains(&self.noise_update_beta)
            && self.update_threshold_db.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("gain config out of range: {self:?}")))
        }
    }
}

/// Per-bin noise power estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePsd {
    pub psd: Vec<f64>,
    pub frames_seen: usize,
}

/// Per-bin, per-frame gains in `[gain_floor, 1]`, frame-major like
/// [`Spectrogram`] bins.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    pub gains: Vec<f64>,
    pub num_bins: usize,
    pub num_frames: usize,
}

impl GainMatrix {
    pub fn gain(&self, m: usize, l: usize) -> f64 {
        self.gains[l * self.num_bins + m]
    }
}

/// Estimates the noise PSD: mean power of the first `init_frames`, then a
/// recursive update on bins whose a posteriori SNR stays below the
/// threshold.
pub fn estimate_noise_psd(spec: &Spectrogram, cfg: &GainConfig) -> Result<NoisePsd> {
    cfg.validate()?;
    let (nb, nf) = (spec.num_bins(), spec.num_frames());
    if nf < cfg.init_frames {
        return Err(Error::TooFewFrames {
            got: nf,
            need: cfg.init_frames,
        });
    }

    let mut psd = vec![0.0f64; nb];
    for l in 0..cfg.init_frames {
        for (m, b) in spec.frame(l).iter().enumerate() {
            psd[m] += b.norm_sqr();
        }
    }
    for p in psd.iter_mut() {
        *p /= cfg.init_frames as f64;
    }

    let threshold = 10f64.powf(cfg.update_threshold_db / 10.0);
    let beta = cfg.noise_update_beta;
    for l in cfg.init_frames..nf {
        // Frame-level a posteriori SNR gates the update, so bin-level
        // fluctuations of stationary noise do not bias the estimate.
        let frame = spec.frame(l);
        let frame_power: f64 = frame.iter().map(|b| b.norm_sqr()).sum();
        let psd_total: f64 = psd.iter().sum();
        let post = frame_power / psd_total.max(PSD_FLOOR);
        if post < threshold {
            for (m, b) in frame.iter().enumerate() {
                psd[m] = beta * psd[m] + (1.0 - beta) * b.norm_sqr();
            }
        }
    }
    Ok(NoisePsd {
        psd,
        frames_seen: nf,
    })
}

/// Wiener-form gain with decision-directed a priori SNR:
/// `xi[l] = alpha * G[l-1]^2 * gamma[l-1] + (1 - alpha) * max(gamma[l] - 1, 0)`,
/// `G = xi / (1 + xi)` clamped to `[gain_floor, 1]`.
pub fn compute_gain(spec: &Spectrogram, noise: &NoisePsd, cfg: &GainConfig) -> Result<GainMatrix> {
    cfg.validate()?;
    let (nb, nf) = (spec.num_bins(), spec.num_frames());
    if noise.psd.len() != nb {
        return Err(Error::ShapeMismatch(format!(
            "noise PSD has {} bins, spectrogram has {nb}",
            noise.psd.len()
        )));
    }

    let alpha = cfg.dd_alpha;
    let mut gains = Vec::with_capacity(nb * nf);
    // Previous frame's G^2 * gamma per bin; zero lead-in.
    let mut carry = vec![0.0f64; nb];
    for l in 0..nf {
        for (m, b) in spec.frame(l).iter().enumerate() {
            let gamma = b.norm_sqr() / noise.psd[m].max(PSD_FLOOR);
            let xi = alpha * carry[m] + (1.0 - alpha) * (gamma - 1.0).max(0.0);
            let g = (xi / (1.0 + xi)).clamp(cfg.gain_floor, 1.0);
            carry[m] = g * g * gamma;
            gains.push(g);
        }
    }
    Ok(GainMatrix {
        gains,
        num_bins: nb,
        num_frames: nf,
    })
}

/// Full filter-based enhancement: STFT, noise tracking, gain, inverse STFT.
/// Output has the same length as the input.
pub fn mmse_enhance(clip: &AudioClip, cfg: &GainConfig, stft_cfg: &StftConfig) -> Result<AudioClip> {
    let spec = stft(clip, stft_cfg)?;
    let noise = estimate_noise_psd(&spec, cfg)?;
    let gains = compute_gain(&spec, &noise, cfg)?;
    let filtered = spec.scaled_by(&gains.gains)?;
    let mut out = istft(&filtered)?;
    out.label = clip.label.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::REQUIRED_SAMPLE_RATE;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rustfft::num_complex::Complex64;

    fn white_noise(n: usize, amp: f64, seed: u64) -> AudioClip {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AudioClip::new(
            (0..n).map(|_| rng.random_range(-amp..amp)).collect(),
            REQUIRED_SAMPLE_RATE,
        )
    }

    #[test]
    fn stationary_noise_psd_matches_sample_variance() {
        let cfg = GainConfig::default();
        let stft_cfg = StftConfig::default();
        let clip = white_noise(16_000, 0.3, 21);
        let spec = stft(&clip, &stft_cfg).unwrap();
        let noise = estimate_noise_psd(&spec, &cfg).unwrap();

        // Oracle: per-bin mean power over the same frames.
        let (nb, nf) = (spec.num_bins(), spec.num_frames());
        let mut mean_power = vec![0.0f64; nb];
        for l in 0..nf {
            for (m, b) in spec.frame(l).iter().enumerate() {
                mean_power[m] += b.norm_sqr();
            }
        }
        for p in mean_power.iter_mut() {
            *p /= nf as f64;
        }
        // Skip DC/Nyquist edge bins where the window leaves little energy.
        for m in 1..nb - 1 {
            let ratio_db = 10.0 * (noise.psd[m] / mean_power[m]).log10();
            assert!(ratio_db.abs() < 3.0, "bin {m}: {ratio_db} dB");
        }
    }

    #[test]
    fn all_zero_input_gives_zero_psd() {
        let clip = AudioClip::new(vec![0.0; 8000], REQUIRED_SAMPLE_RATE);
        let spec = stft(&clip, &StftConfig::default()).unwrap();
        let noise = estimate_noise_psd(&spec, &GainConfig::default()).unwrap();
        assert!(noise.psd.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn speech_frames_are_skipped_by_threshold() {
        // 6+ noise-only frames, then loud tone frames; estimate must stay
        // near the noise-only prefix estimate.
        let stft_cfg = StftConfig::default();
        let cfg = GainConfig::default();
        let noise_clip = white_noise(16_000, 0.05, 4);
        let mut samples = noise_clip.samples.clone();
        for (i, s) in samples.iter_mut().enumerate().skip(8_000) {
            *s += 0.8 * (std::f64::consts::TAU * 1000.0 * i as f64 / 16_000.0).sin();
        }
        let mixed = AudioClip::new(samples, REQUIRED_SAMPLE_RATE);

        let prefix = AudioClip::new(noise_clip.samples[..8_000].to_vec(), REQUIRED_SAMPLE_RATE);
        let oracle = estimate_noise_psd(&stft(&prefix, &stft_cfg).unwrap(), &cfg).unwrap();
        let got = estimate_noise_psd(&stft(&mixed, &stft_cfg).unwrap(), &cfg).unwrap();

        // Compare in the tone's bin neighborhood, where leakage would show.
        let tone_bin = (1000.0f64 / (16_000.0 / 512.0)).round() as usize;
        for m in tone_bin - 2..=tone_bin + 2 {
            let ratio_db = 10.0f64 * (got.psd[m] / oracle.psd[m]).log10();
            assert!(ratio_db.abs() < 3.0, "bin {m}: {ratio_db} dB");
        }
    }

    #[test]
    fn too_few_frames_rejected() {
        let clip = white_noise(600, 0.1, 2);
        let spec = stft(&clip, &StftConfig::default()).unwrap();
        assert!(matches!(
            estimate_noise_psd(&spec, &GainConfig::default()),
            Err(Error::TooFewFrames { .. })
        ));
    }

    #[test]
    fn wiener_limits() {
        let cfg = StftConfig::default();
        let nb = cfg.num_bins();
        let frames = vec![vec![Complex64::new(1.0, 0.0); nb]; 3];
        let spec = Spectrogram::from_frames(frames, cfg, 1024).unwrap();

        // Zero noise PSD with signal energy: gain clamps to 1.
        let zero_noise = NoisePsd {
            psd: vec![0.0; nb],
            frames_seen: 3,
        };
        let g = compute_gain(&spec, &zero_noise, &GainConfig::default()).unwrap();
        assert!(g.gains.iter().all(|&x| x == 1.0));

        // Noise-only steady state (gamma ~ 1): gain falls to the floor.
        let matched_noise = NoisePsd {
            psd: vec![1.0; nb],
            frames_seen: 3,
        };
        let g = compute_gain(&spec, &matched_noise, &GainConfig::default()).unwrap();
        let floor = GainConfig::default().gain_floor;
        assert!(g.gains.iter().all(|&x| x == floor));
    }

    #[test]
    fn single_frame_closed_form() {
        // alpha = 0, gamma = 3 => xi = 2, G = 2/3.
        let cfg = StftConfig::default();
        let nb = cfg.num_bins();
        let frames = vec![vec![Complex64::new(3f64.sqrt(), 0.0); nb]];
        let spec = Spectrogram::from_frames(frames, cfg, 512).unwrap();
        let noise = NoisePsd {
            psd: vec![1.0; nb],
            frames_seen: 1,
        };
        let gcfg = GainConfig {
            dd_alpha: 0.0,
            ..GainConfig::default()
        };
        let g = compute_gain(&spec, &noise, &gcfg).unwrap();
        for &x in &g.gains {
            assert!((x - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gains_always_within_floor_and_one() {
        let clip = white_noise(16_000, 0.4, 8);
        let spec = stft(&clip, &StftConfig::default()).unwrap();
        let cfg = GainConfig::default();
        let noise = estimate_noise_psd(&spec, &cfg).unwrap();
        let g = compute_gain(&spec, &noise, &cfg).unwrap();
        assert!(g
            .gains
            .iter()
            .all(|&x| (cfg.gain_floor..=1.0).contains(&x)));
    }

    #[test]
    fn enhance_is_identity_when_noise_psd_is_zero() {
        // Pure tone input; noise estimator sees a stationary "noise" equal
        // to the signal, so force the identity limit through compute_gain
        // with a zero PSD instead.
        let stft_cfg = StftConfig::default();
        let n = 16_000;
        let samples: Vec<f64> = (0..n)
            .map(|i| 0.4 * (std::f64::consts::TAU * 440.0 * i as f64 / 16_000.0).sin())
            .collect();
        let clip = AudioClip::new(samples, REQUIRED_SAMPLE_RATE);
        let spec = stft(&clip, &stft_cfg).unwrap();
        let noise = NoisePsd {
            psd: vec![0.0; spec.num_bins()],
            frames_seen: spec.num_frames(),
        };
        let gcfg = GainConfig {
            dd_alpha: 0.0,
            ..GainConfig::default()
        };
        let gains = compute_gain(&spec, &noise, &gcfg).unwrap();
        let out = istft(&spec.scaled_by(&gains.gains).unwrap()).unwrap();
        let num: f64 = out
            .samples
            .iter()
            .zip(&clip.samples)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let den: f64 = clip.samples.iter().map(|s| s * s).sum();
        assert!((num / den).sqrt() < 1e-9);
    }

    #[test]
    fn noise_only_output_is_floored() {
        let cfg = GainConfig::default();
        let clip = white_noise(16_000, 0.1, 77); // ~ -10 dBFS region
        let out = mmse_enhance(&clip, &cfg, &StftConfig::default()).unwrap();
        assert_eq!(out.len(), clip.len());
        assert!(out.rms() <= cfg.gain_floor * clip.rms() * 1.1);
    }

    #[test]
    fn raising_gain_floor_never_decreases_energy() {
        let clip = white_noise(12_000, 0.3, 5);
        let stft_cfg = StftConfig::default();
        let mut prev = 0.0;
        for floor in [0.05, 0.1, 0.2, 0.4] {
            let cfg = GainConfig {
                gain_floor: floor,
                ..GainConfig::default()
            };
            let out = mmse_enhance(&clip, &cfg, &stft_cfg).unwrap();
            let energy: f64 = out.samples.iter().map(|s| s * s).sum();
            assert!(energy >= prev, "floor {floor}: {energy} < {prev}");
            prev = energy;
        }
    }
}
