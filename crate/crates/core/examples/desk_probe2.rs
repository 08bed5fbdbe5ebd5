//! Diagnostics probe (not shipped).
use clearwave_core::audio::AudioClip;
use clearwave_core::corpus::{mix_at_snr, MixSpec};
use clearwave_core::ddae::{enhance_ddae, train_ddae, DdaeConfig};
use clearwave_core::dsp::{features_to_spectrogram, istft, log_magnitude, stft, LogMagFeatures, StftConfig};
use clearwave_core::fcn::{enhance_fcn, train_fcn, FcnConfig};
use clearwave_core::metrics::stoi;
use clearwave_core::mmse::{mmse_enhance, GainConfig};
use clearwave_core::nn::TrainConfig;
use clearwave_core::corpus::{synthesize_corpus, CorpusRecipe, Pairing};
use clearwave_core::synthetic::{babble_noise, speech_like, white_noise};

fn mean(v: &[f64]) -> f64 { v.iter().sum::<f64>() / v.len() as f64 }

fn main() {
    let cfg = StftConfig::default();
    let train_cleans: Vec<AudioClip> = (0..20).map(|i| speech_like(i, 0.7)).collect();
    let train_noises = vec![white_noise(1000, 2.0, 0.1), babble_noise(2000, 2.0)];
    let test_cleans: Vec<AudioClip> = (100..108).map(|i| speech_like(i, 1.5)).collect();

    // Per-noise test items at 0 dB.
    let mut items: Vec<(usize, AudioClip, AudioClip)> = Vec::new(); // (noise idx, clean, noisy)
    for (i, c) in test_cleans.iter().enumerate() {
        for (j, n) in train_noises.iter().enumerate() {
            let spec = MixSpec { snr_db: 0.0, noise_label: "t".into(), seed: 5000 + (i * 10 + j) as u64 };
            items.push((j, c.clone(), mix_at_snr(c, n, &spec).unwrap().noisy));
        }
    }

    for (j, name) in [(0usize, "white"), (1, "babble")] {
        let noisy: Vec<f64> = items.iter().filter(|(k, _, _)| *k == j).map(|(_, c, n)| stoi(c, n).unwrap()).collect();
        // Oracle ceiling: clean magnitudes with noisy phase.
        let oracle: Vec<f64> = items.iter().filter(|(k, _, _)| *k == j).map(|(_, c, n)| {
            let clean_feat = log_magnitude(&stft(c, &cfg).unwrap());
            let noisy_feat = log_magnitude(&stft(n, &cfg).unwrap());
            let hybrid = LogMagFeatures { values: clean_feat.values.clone(), phase: noisy_feat.phase.clone(), ..clean_feat };
            let resynth = istft(&features_to_spectrogram(&hybrid)).unwrap();
            stoi(c, &resynth).unwrap()
        }).collect();
        let mmse: Vec<f64> = items.iter().filter(|(k, _, _)| *k == j).map(|(_, c, n)| {
            stoi(c, &mmse_enhance(n, &GainConfig::default(), &cfg).unwrap()).unwrap()
        }).collect();
        println!("{name}: noisy {:.4} oracle-mag {:.4} mmse {:.4}", mean(&noisy), mean(&oracle), mean(&mmse));
    }

    // Quick check of loss trajectories with longer training on a smaller corpus subset.
    let recipe = CorpusRecipe {
        clean_clips: train_cleans.clone(),
        noise_clips: train_noises.clone(),
        snr_levels: vec![-10.0, -7.0, -4.0, -1.0, 1.0, 4.0, 7.0, 10.0],
        pairing: Pairing::RandomNoisePerUtterance,
        draws_per_cell: 1,
        seed: 42,
    };
    let corpus = synthesize_corpus(&recipe).unwrap();
    let pairs: Vec<(AudioClip, AudioClip)> = corpus.iter().map(|p| (p.noisy.clone(), recipe.clean_clips[p.clean_idx].clone())).collect();

    let ddae_cfg = DdaeConfig { context_frames: 5, hidden_layers: 3, hidden_width: 128, ..DdaeConfig::default() };
    let tc = TrainConfig { epochs: 40, batch_size: 16, rng_seed: 7, ..TrainConfig::default() };
    let (ddae, trace) = train_ddae(&pairs, &ddae_cfg, &tc).unwrap();
    println!("ddae losses: {:?}", trace.epoch_objectives.iter().step_by(5).map(|x| (x * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    for (j, name) in [(0usize, "white"), (1, "babble")] {
        let s: Vec<f64> = items.iter().filter(|(k, _, _)| *k == j).map(|(_, c, n)| stoi(c, &enhance_ddae(n, &ddae).unwrap()).unwrap()).collect();
        println!("ddae 40ep {name}: {:.4}", mean(&s));
    }

    let fcn_cfg = FcnConfig { num_layers: 4, filters_per_layer: 8, filter_len: 31, ..FcnConfig::default() };
    let tc = TrainConfig { epochs: 60, rng_seed: 8, ..TrainConfig::default() };
    let (fcn, trace) = train_fcn(&pairs, &fcn_cfg, &tc).unwrap();
    println!("fcn losses: {:?}", trace.epoch_objectives.iter().step_by(10).map(|x| (x * 10000.0).round() / 10000.0).collect::<Vec<_>>());
    for (j, name) in [(0usize, "white"), (1, "babble")] {
        let s: Vec<f64> = items.iter().filter(|(k, _, _)| *k == j).map(|(_, c, n)| stoi(c, &enhance_fcn(n, &fcn).unwrap()).unwrap()).collect();
        println!("fcn 60ep {name}: {:.4}", mean(&s));
    }
}
