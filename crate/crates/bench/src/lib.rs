//! Shared setup helpers for the criterion benches.

use clearwave_core::audio::AudioClip;
use clearwave_core::corpus::{mix_at_snr, MixSpec};
use clearwave_core::synthetic::{speech_like, white_noise};

/// One second of speech mixed with white noise at 5 dB.
pub fn noisy_second() -> AudioClip {
    let clean = speech_like(1, 1.0);
    let noise = white_noise(2, 1.0, 0.1);
    let spec = MixSpec {
        snr_db: 5.0,
        noise_label: "white".into(),
        seed: 3,
    };
    mix_at_snr(&clean, &noise, &spec).expect("bench mix").noisy
}

/// A short noisy/clean training pair.
pub fn training_pair() -> (AudioClip, AudioClip) {
    let clean = speech_like(4, 0.5);
    let noise = white_noise(5, 0.5, 0.1);
    let spec = MixSpec {
        snr_db: 0.0,
        noise_label: "white".into(),
        seed: 6,
    };
    (mix_at_snr(&clean, &noise, &spec).expect("bench mix").noisy, clean)
}
