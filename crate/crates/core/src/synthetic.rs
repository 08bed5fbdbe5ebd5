//! Seeded synthetic audio generators: speech-like harmonic utterances and
//! several noise textures. Used by the test suites and the demo pipeline
//! wherever recorded corpora are unavailable.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use crate::audio::{AudioClip, REQUIRED_SAMPLE_RATE};

const FS: f64 = REQUIRED_SAMPLE_RATE as f64;

/// Standard normal sample via Box-Muller.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// A speech-like utterance: a gliding harmonic source with syllabic
/// amplitude modulation, moving formant-style spectral peaks, a small
/// aspiration-noise floor, and a short silent lead-in/out.
pub fn speech_like(seed: u64, duration_s: f64) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let n = (duration_s * FS).round() as usize;
    let lead = (0.12 * FS) as usize; // silent onset, noise-only for trackers
    let tail = (0.05 * FS) as usize;

    let f0_base = rng.random_range(105.0..225.0);
    let f0_drift = rng.random_range(-30.0..30.0);
    let syllable_rate = rng.random_range(2.5..4.5);
    let syllable_phase = rng.random_range(0.0..TAU);
    let num_harmonics = 24usize;

    // Two formant-like resonances wandering over the utterance.
    let formant1 = rng.random_range(350.0..850.0);
    let formant2 = rng.random_range(1200.0..2400.0);
    let formant_wander = rng.random_range(0.5..1.5);

    let mut phases: Vec<f64> = (0..num_harmonics).map(|_| rng.random_range(0.0..TAU)).collect();
    let mut samples = vec![0.0f64; n];
    let voiced_len = n.saturating_sub(lead + tail);
    for t in 0..voiced_len {
        let i = lead + t;
        let time = t as f64 / FS;
        let f0 = f0_base + f0_drift * time;
        // Syllabic envelope: raised cosine between 0.1 and 1.
        let syl = 0.55 + 0.45 * (TAU * syllable_rate * time + syllable_phase).sin();
        let f1 = formant1 * (1.0 + 0.18 * (TAU * formant_wander * time).sin());
        let f2 = formant2 * (1.0 + 0.12 * (TAU * formant_wander * time + 1.3).cos());

        let mut v = 0.0;
        for (h, phase) in phases.iter_mut().enumerate() {
            let freq = f0 * (h + 1) as f64;
            if freq > 7600.0 {
                break;
            }
            *phase += TAU * freq / FS;
            // Formant magnitude response: two resonant humps plus tilt.
            let g1 = 1.0 / (1.0 + ((freq - f1) / 220.0).powi(2));
            let g2 = 0.6 / (1.0 + ((freq - f2) / 320.0).powi(2));
            let tilt = 1.0 / (1.0 + freq / 2500.0);
            v += (g1 + g2 + 0.05) * tilt * phase.sin();
        }
        let aspiration = 0.01 * gaussian(&mut rng);
        samples[i] = syl * (0.22 * v + aspiration);
    }

    // Normalize to a consistent working level.
    let peak = samples.iter().fold(0.0f64, |a, &s| a.max(s.abs()));
    if peak > 0.0 {
        let k = 0.45 / peak;
        for s in samples.iter_mut() {
            *s *= k;
        }
    }
    AudioClip::new(samples, REQUIRED_SAMPLE_RATE).with_label(format!("speech{seed}"))
}

/// Stationary Gaussian white noise at the given RMS.
pub fn white_noise(seed: u64, duration_s: f64, rms: f64) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0xd134_2543_de82_ef95));
    let n = (duration_s * FS).round() as usize;
    let samples = (0..n).map(|_| rms * gaussian(&mut rng)).collect();
    AudioClip::new(samples, REQUIRED_SAMPLE_RATE).with_label(format!("white{seed}"))
}

/// Babble-like noise: a sum of many speech-like sources, which keeps a
/// speech-band spectrum without intelligible structure.
pub fn babble_noise(seed: u64, duration_s: f64) -> AudioClip {
    let voices = 12u64;
    let n = (duration_s * FS).round() as usize;
    let mut acc = vec![0.0f64; n];
    for v in 0..voices {
        let talker = speech_like(seed.wrapping_mul(31).wrapping_add(v + 1), duration_s);
        for (a, s) in acc.iter_mut().zip(&talker.samples) {
            *a += s;
        }
    }
    let rms = (acc.iter().map(|s| s * s).sum::<f64>() / n as f64).sqrt();
    if rms > 0.0 {
        let k = 0.1 / rms;
        for s in acc.iter_mut() {
            *s *= k;
        }
    }
    AudioClip::new(acc, REQUIRED_SAMPLE_RATE).with_label(format!("babble{seed}"))
}

/// Machine-like noise: a low hum with drifting amplitude, periodic beeps,
/// and a broadband floor. Spectrally far from white or babble textures.
pub fn machine_noise(seed: u64, duration_s: f64) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0xa076_1d64_78bd_642f));
    let n = (duration_s * FS).round() as usize;
    let hum_freq = rng.random_range(85.0..140.0);
    let beep_freq = rng.random_range(1800.0..2600.0);
    let beep_period = rng.random_range(0.4..0.8);
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / FS;
        let drift = 0.8 + 0.2 * (TAU * 0.3 * t).sin();
        let hum = 0.09 * drift * ((TAU * hum_freq * t).sin() + 0.5 * (TAU * 2.0 * hum_freq * t).sin());
        let beep_on = (t % beep_period) < 0.08;
        let beep = if beep_on { 0.05 * (TAU * beep_freq * t).sin() } else { 0.0 };
        let floor = 0.012 * gaussian(&mut rng);
        samples.push(hum + beep + floor);
    }
    AudioClip::new(samples, REQUIRED_SAMPLE_RATE).with_label(format!("machine{seed}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(speech_like(3, 0.7).samples, speech_like(3, 0.7).samples);
        assert_eq!(white_noise(3, 0.7, 0.1).samples, white_noise(3, 0.7, 0.1).samples);
        assert_eq!(babble_noise(3, 0.4).samples, babble_noise(3, 0.4).samples);
        assert_eq!(machine_noise(3, 0.4).samples, machine_noise(3, 0.4).samples);
    }

    #[test]
    fn speech_has_silent_lead_in_and_bounded_peak() {
        let clip = speech_like(9, 1.0);
        assert!(clip.samples[..1900].iter().all(|&s| s == 0.0));
        let peak = clip.samples.iter().fold(0.0f64, |a, &s| a.max(s.abs()));
        assert!(peak > 0.2 && peak <= 0.45 + 1e-12);
    }

    #[test]
    fn different_seeds_differ() {
        assert_ne!(speech_like(1, 0.5).samples, speech_like(2, 0.5).samples);
        assert_ne!(white_noise(1, 0.5, 0.1).samples, white_noise(2, 0.5, 0.1).samples);
    }

    #[test]
    fn white_noise_rms_is_close_to_requested() {
        let clip = white_noise(5, 2.0, 0.25);
        assert!((clip.rms() - 0.25).abs() < 0.01);
    }
}
