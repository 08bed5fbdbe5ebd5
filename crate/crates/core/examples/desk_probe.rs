//! Scratch probe for sizing the desk-scale training runs (not shipped).

use std::time::Instant;

use clearwave_core::audio::AudioClip;
use clearwave_core::corpus::{
    build_adaptation_pairs, synthesize_corpus, AdaptationMode, CorpusRecipe, MixSpec, Pairing,
    mix_at_snr,
};
use clearwave_core::ddae::{enhance_ddae, train_ddae, DdaeConfig};
use clearwave_core::fcn::{enhance_fcn, train_fcn, FcnConfig};
use clearwave_core::metrics::stoi;
use clearwave_core::nn::TrainConfig;
use clearwave_core::synthetic::{babble_noise, machine_noise, speech_like, white_noise};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() {
    let train_cleans: Vec<AudioClip> = (0..20).map(|i| speech_like(i, 0.7)).collect();
    let train_noises = vec![white_noise(1000, 2.0, 0.1), babble_noise(2000, 2.0)];
    let recipe = CorpusRecipe {
        clean_clips: train_cleans.clone(),
        noise_clips: train_noises.clone(),
        snr_levels: vec![-10.0, -7.0, -4.0, -1.0, 1.0, 4.0, 7.0, 10.0],
        pairing: Pairing::RandomNoisePerUtterance,
        draws_per_cell: 1,
        seed: 42,
    };
    let t0 = Instant::now();
    let corpus = synthesize_corpus(&recipe).unwrap();
    let pairs: Vec<(AudioClip, AudioClip)> = corpus
        .iter()
        .map(|p| (p.noisy.clone(), recipe.clean_clips[p.clean_idx].clone()))
        .collect();
    println!("corpus: {} pairs in {:.1}s", pairs.len(), t0.elapsed().as_secs_f64());

    // Held-out test set: unseen speakers, matched noises, 0 dB.
    let test_cleans: Vec<AudioClip> = (100..108).map(|i| speech_like(i, 1.5)).collect();
    let test_items: Vec<(AudioClip, AudioClip)> = test_cleans
        .iter()
        .enumerate()
        .flat_map(|(i, c)| {
            train_noises.iter().enumerate().map(move |(j, n)| {
                let spec = MixSpec {
                    snr_db: 0.0,
                    noise_label: "t".into(),
                    seed: 5000 + (i * 10 + j) as u64,
                };
                (c.clone(), mix_at_snr(c, n, &spec).unwrap().noisy)
            })
        })
        .collect();
    let noisy_stoi: Vec<f64> = test_items.iter().map(|(c, n)| stoi(c, n).unwrap()).collect();
    println!("noisy STOI @0dB: {:.4}", mean(&noisy_stoi));

    // DDAE
    let ddae_cfg = DdaeConfig {
        context_frames: 5,
        hidden_layers: 3,
        hidden_width: 128,
        ..DdaeConfig::default()
    };
    let tc = TrainConfig { epochs: 25, batch_size: 16, rng_seed: 7, ..TrainConfig::default() };
    let t0 = Instant::now();
    let (ddae, trace) = train_ddae(&pairs, &ddae_cfg, &tc).unwrap();
    let ddae_time = t0.elapsed().as_secs_f64();
    let ddae_stoi: Vec<f64> = test_items
        .iter()
        .map(|(c, n)| stoi(c, &enhance_ddae(n, &ddae).unwrap()).unwrap())
        .collect();
    println!(
        "DDAE: {:.1}s train, STOI {:.4} (loss {:.4} -> {:.4})",
        ddae_time,
        mean(&ddae_stoi),
        trace.epoch_objectives.first().unwrap(),
        trace.epoch_objectives.last().unwrap()
    );

    // FCN
    let fcn_cfg = FcnConfig {
        num_layers: 4,
        filters_per_layer: 8,
        filter_len: 31,
        ..FcnConfig::default()
    };
    let tc = TrainConfig { epochs: 30, rng_seed: 8, ..TrainConfig::default() };
    let t0 = Instant::now();
    let (fcn, trace) = train_fcn(&pairs, &fcn_cfg, &tc).unwrap();
    let fcn_time = t0.elapsed().as_secs_f64();
    let fcn_stoi: Vec<f64> = test_items
        .iter()
        .map(|(c, n)| stoi(c, &enhance_fcn(n, &fcn).unwrap()).unwrap())
        .collect();
    println!(
        "FCN: {:.1}s train, STOI {:.4} (loss {:.4} -> {:.4})",
        fcn_time,
        mean(&fcn_stoi),
        trace.epoch_objectives.first().unwrap(),
        trace.epoch_objectives.last().unwrap()
    );

    // MA(N) on a novel noise
    let novel = machine_noise(3000, 2.0);
    let ma_test: Vec<(AudioClip, AudioClip)> = test_cleans
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let spec = MixSpec {
                snr_db: 0.0,
                noise_label: "novel".into(),
                seed: 7000 + i as u64,
            };
            (c.clone(), mix_at_snr(c, &novel, &spec).unwrap().noisy)
        })
        .collect();
    let unadapted: Vec<f64> = ma_test
        .iter()
        .map(|(c, n)| stoi(c, &enhance_fcn(n, &fcn).unwrap()).unwrap())
        .collect();
    let ma_pairs = build_adaptation_pairs(
        AdaptationMode::Noise,
        Some(&novel),
        None,
        &train_cleans,
        &train_noises,
        &[-1.0, 1.0, 4.0, 7.0],
        11,
    )
    .unwrap();
    let t0 = Instant::now();
    let tc = TrainConfig { epochs: 10, rng_seed: 9, ..TrainConfig::default() };
    let (adapted, _) = clearwave_core::fcn::continue_train_fcn(&fcn, &ma_pairs, &tc).unwrap();
    let ma_time = t0.elapsed().as_secs_f64();
    let adapted_stoi: Vec<f64> = ma_test
        .iter()
        .map(|(c, n)| stoi(c, &enhance_fcn(n, &adapted).unwrap()).unwrap())
        .collect();
    let novel_noisy: Vec<f64> = ma_test.iter().map(|(c, n)| stoi(c, n).unwrap()).collect();
    println!(
        "MA: {:.1}s adapt ({} pairs), novel-noise STOI noisy {:.4} unadapted {:.4} adapted {:.4}",
        ma_time,
        ma_pairs.len(),
        mean(&novel_noisy),
        mean(&unadapted),
        mean(&adapted_stoi)
    );
}
