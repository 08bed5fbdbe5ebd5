use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use clearwave_bench::{noisy_second, training_pair};
use clearwave_core::dsp::{istft, stft, StftConfig};
use clearwave_core::fcn::{build_fcn, enhance_fcn, FcnConfig};
use clearwave_core::metrics::{segmental_snr, stoi};
use clearwave_core::mmse::{mmse_enhance, GainConfig};
use clearwave_core::nn::{AdamState, Tensor, TrainConfig};
use clearwave_core::synthetic::speech_like;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bench_stft_round_trip(c: &mut Criterion) {
    let clip = noisy_second();
    let cfg = StftConfig::default();
    c.bench_function("stft_istft_1s", |b| {
        b.iter(|| {
            let spec = stft(black_box(&clip), &cfg).unwrap();
            black_box(istft(&spec).unwrap());
        })
    });
}

fn bench_mmse(c: &mut Criterion) {
    let clip = noisy_second();
    let gain = GainConfig::default();
    let cfg = StftConfig::default();
    c.bench_function("mmse_enhance_1s", |b| {
        b.iter(|| black_box(mmse_enhance(black_box(&clip), &gain, &cfg).unwrap()))
    });
}

fn bench_fcn_forward(c: &mut Criterion) {
    let clip = noisy_second();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let model = build_fcn(&FcnConfig::default(), &mut rng).unwrap();
    c.bench_function("fcn_forward_1s", |b| {
        b.iter(|| black_box(enhance_fcn(black_box(&clip), &model).unwrap()))
    });
}

fn bench_fcn_train_step(c: &mut Criterion) {
    let (noisy, clean) = training_pair();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let small = FcnConfig {
        num_layers: 4,
        filters_per_layer: 8,
        filter_len: 31,
        ..FcnConfig::default()
    };
    let mut model = build_fcn(&small, &mut rng).unwrap();
    let mut state = AdamState::for_model(&model);
    let tc = TrainConfig::default();
    let input = Tensor::new(vec![1, noisy.len()], noisy.samples.clone()).unwrap();
    let target = Tensor::new(vec![1, clean.len()], clean.samples.clone()).unwrap();
    c.bench_function("fcn_train_step_0.5s", |b| {
        b.iter(|| {
            black_box(
                clearwave_core::nn::train_step(&mut model, &input, &target, &mut state, &tc)
                    .unwrap(),
            )
        })
    });
}

fn bench_metrics(c: &mut Criterion) {
    let clean = speech_like(9, 1.0);
    let processed = noisy_second();
    c.bench_function("stoi_1s", |b| {
        b.iter(|| black_box(stoi(black_box(&clean), black_box(&processed)).unwrap()))
    });
    c.bench_function("segsnr_1s", |b| {
        b.iter(|| black_box(segmental_snr(black_box(&clean), black_box(&processed)).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_stft_round_trip,
    bench_mmse,
    bench_fcn_forward,
    bench_fcn_train_step,
    bench_metrics
);
criterion_main!(benches);
