//! Shared fixture set for cross-checking the STOI implementation against
//! an independent reference. Every signal is quantized to the 16-bit PCM
//! grid so the in-memory values equal what a WAV round-trip yields.

use clearwave_core::audio::AudioClip;
use clearwave_core::corpus::{mix_at_snr, MixSpec};
use clearwave_core::dsp::StftConfig;
use clearwave_core::mmse::{mmse_enhance, GainConfig};
use clearwave_core::synthetic::{babble_noise, machine_noise, speech_like, white_noise};

/// Quantizes samples to the 16-bit PCM grid, exactly as a WAV write/read
/// round-trip does.
pub fn quantize_to_pcm_grid(clip: &AudioClip) -> AudioClip {
    let samples = clip
        .samples
        .iter()
        .map(|&s| (s * 32768.0).round().clamp(-32768.0, 32767.0) / 32768.0)
        .collect();
    AudioClip::new(samples, clip.sample_rate_hz)
}

fn mixed(speech: &AudioClip, noise: &AudioClip, snr_db: f64, seed: u64) -> AudioClip {
    let spec = MixSpec {
        snr_db,
        noise_label: "fixture".into(),
        seed,
    };
    mix_at_snr(speech, noise, &spec).expect("fixture mix").noisy
}

/// Ten (clean, processed) pairs spanning high to low intelligibility,
/// including one nonlinearly processed (gain-filtered) pair.
pub fn stoi_crosscheck_fixtures() -> Vec<(AudioClip, AudioClip)> {
    let mut fixtures = Vec::new();
    let dur = 1.5;

    let conditions: [(u64, &str, f64); 9] = [
        (0, "white", 20.0),
        (1, "white", 5.0),
        (2, "white", 0.0),
        (3, "white", -5.0),
        (4, "babble", 10.0),
        (5, "babble", 0.0),
        (6, "babble", -5.0),
        (7, "machine", 5.0),
        (8, "machine", 0.0),
    ];
    for (i, kind, snr) in conditions {
        let clean = quantize_to_pcm_grid(&speech_like(i, dur));
        let noise = match kind {
            "white" => white_noise(100 + i, dur, 0.1),
            "babble" => babble_noise(200 + i, dur),
            _ => machine_noise(300 + i, dur),
        };
        let processed = quantize_to_pcm_grid(&mixed(&clean, &noise, snr, 40 + i));
        fixtures.push((clean, processed));
    }

    // Nonlinear processing: a gain-filtered noisy mixture.
    let clean = quantize_to_pcm_grid(&speech_like(9, dur));
    let noisy = quantize_to_pcm_grid(&mixed(&clean, &white_noise(109, dur, 0.1), 2.0, 49));
    let enhanced = mmse_enhance(&noisy, &GainConfig::default(), &StftConfig::default())
        .expect("fixture enhance");
    fixtures.push((clean, quantize_to_pcm_grid(&enhanced)));

    fixtures
}
