//! Short-time objective intelligibility measure.
//!
//! Fixed constants of the reference algorithm: 10 kHz analysis rate,
//! 256-sample frames with 50% overlap zero-padded to a 512 FFT, 15
//! one-third-octave bands from 150 Hz, 30-frame segments, a -15 dB
//! signal-to-distortion clipping bound, and a 40 dB energy VAD against the
//! clean signal's loudest frame. Inputs at other sample rates are taken
//! through an internal polyphase windowed-sinc resampler that exists only
//! for this metric.

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Analysis sample rate.
pub const STOI_FS: u32 = 10_000;
/// Analysis frame length at 10 kHz.
const N_FRAME: usize = 256;
/// FFT length (frames are zero-padded).
const NFFT: usize = 512;
/// One-third-octave band count.
const NUM_BANDS: usize = 15;
/// Center frequency of the lowest band (Hz).
const MIN_FREQ: f64 = 150.0;
/// Frames per intelligibility segment.
const SEG_LEN: usize = 30;
/// Lower signal-to-distortion bound (dB).
const BETA: f64 = -15.0;
/// Energy range (dB) below the loudest clean frame kept by the VAD.
const DYN_RANGE: f64 = 40.0;

const EPS: f64 = f64::EPSILON;

/// Immutable constant bundle, exposed for documentation and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoiConfig {
    pub sample_rate_hz: u32,
    pub frame_len: usize,
    pub fft_size: usize,
    pub num_bands: usize,
    pub min_center_freq_hz: f64,
    pub segment_frames: usize,
    pub clip_bound_db: f64,
    pub vad_range_db: f64,
}

impl StoiConfig {
    pub const fn reference() -> Self {
        StoiConfig {
            sample_rate_hz: STOI_FS,
            frame_len: N_FRAME,
            fft_size: NFFT,
            num_bands: NUM_BANDS,
            min_center_freq_hz: MIN_FREQ,
            segment_frames: SEG_LEN,
            clip_bound_db: BETA,
            vad_range_db: DYN_RANGE,
        }
    }
}

/// Computes the intelligibility score in `[0, 1]` of `processed` against
/// the `clean` reference. The processed clip is truncated or zero-padded
/// to the clean clip's length first.
pub fn stoi(clean: &AudioClip, processed: &AudioClip) -> Result<f64> {
    if clean.is_empty() {
        return Err(Error::LengthZero);
    }
    clean.validate("stoi clean")?;
    processed.validate("stoi processed")?;
    if clean.rms() == 0.0 {
        return Err(Error::SilentReference);
    }

    let mut proc_samples = processed.samples.clone();
    proc_samples.resize(clean.len(), 0.0);

    let x = to_analysis_rate(&clean.samples, clean.sample_rate_hz);
    let y = to_analysis_rate(&proc_samples, processed.sample_rate_hz);

    let (x_sil, y_sil) = remove_silent_frames(&x, &y, DYN_RANGE, N_FRAME, N_FRAME / 2);
    if x_sil.len() < N_FRAME {
        return Err(Error::LengthZero);
    }

    let x_spec = stft_mag_sq(&x_sil);
    let y_spec = stft_mag_sq(&y_sil);
    let num_frames = x_spec.len();
    if num_frames < SEG_LEN {
        return Err(Error::LengthZero);
    }

    let obm = third_octave_band_matrix();
    let x_tob = band_magnitudes(&x_spec, &obm);
    let y_tob = band_magnitudes(&y_spec, &obm);

    // Sliding 30-frame segments; per band, normalize and clip the degraded
    // envelope, then correlate with the clean envelope.
    let clip_factor = 1.0 + 10f64.powf(-BETA / 20.0);
    let num_segments = num_frames - SEG_LEN + 1;
    let mut total = 0.0;
    let mut x_seg = [0.0f64; SEG_LEN];
    let mut y_seg = [0.0f64; SEG_LEN];
    for seg in 0..num_segments {
        for band in 0..NUM_BANDS {
            for j in 0..SEG_LEN {
                x_seg[j] = x_tob[seg + j][band];
                y_seg[j] = y_tob[seg + j][band];
            }
            let x_norm = l2(&x_seg);
            let y_norm = l2(&y_seg);
            let alpha = x_norm / (y_norm + EPS);
            let mut y_prime = [0.0f64; SEG_LEN];
            for j in 0..SEG_LEN {
                y_prime[j] = (y_seg[j] * alpha).min(x_seg[j] * clip_factor);
            }
            total += centered_correlation(&x_seg, &y_prime);
        }
    }
    let d = total / (num_segments * NUM_BANDS) as f64;
    Ok(d.clamp(0.0, 1.0))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn centered_correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let (mut xx, mut yy) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let da = a - mx;
        let db = b - my;
        num += da * db;
        xx += da * da;
        yy += db * db;
    }
    num / ((xx.sqrt() + EPS) * (yy.sqrt() + EPS))
}

fn to_analysis_rate(samples: &[f64], rate: u32) -> Vec<f64> {
    if rate == STOI_FS {
        samples.to_vec()
    } else {
        resample(samples, STOI_FS as usize, rate as usize)
    }
}

/// Analysis window: symmetric Hann of length `n + 2` with the zero
/// endpoints dropped.
fn trimmed_hann(n: usize) -> Vec<f64> {
    let m = (n + 2 - 1) as f64;
    (0..n)
        .map(|j| 0.5 * (1.0 - (std::f64::consts::TAU * (j + 1) as f64 / m).cos()))
        .collect()
}

/// Drops frames whose clean-signal energy falls more than `dyn_range` dB
/// below the loudest clean frame, then overlap-adds the survivors back
/// into aligned time signals.
fn remove_silent_frames(
    x: &[f64],
    y: &[f64],
    dyn_range: f64,
    frame_len: usize,
    hop: usize,
) -> (Vec<f64>, Vec<f64>) {
    let w = trimmed_hann(frame_len);
    if x.len() < frame_len {
        return (Vec::new(), Vec::new());
    }
    let starts: Vec<usize> = (0..=x.len() - frame_len).step_by(hop).collect();
    let energies_db: Vec<f64> = starts
        .iter()
        .map(|&s| {
            let e: f64 = (0..frame_len).map(|j| (x[s + j] * w[j]).powi(2)).sum();
            20.0 * (e.sqrt() + EPS).log10()
        })
        .collect();
    let max_db = energies_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let kept: Vec<usize> = starts
        .iter()
        .zip(&energies_db)
        .filter(|(_, &e)| max_db - dyn_range - e < 0.0)
        .map(|(&s, _)| s)
        .collect();
    if kept.is_empty() {
        return (Vec::new(), Vec::new());
    }

    let out_len = (kept.len() - 1) * hop + frame_len;
    let mut xs = vec![0.0; out_len];
    let mut ys = vec![0.0; out_len];
    for (i, &s) in kept.iter().enumerate() {
        let pos = i * hop;
        for j in 0..frame_len {
            xs[pos + j] += x[s + j] * w[j];
            ys[pos + j] += y[s + j] * w[j];
        }
    }
    (xs, ys)
}

/// Squared one-sided magnitudes per frame (frames of `N_FRAME` samples at
/// 50% overlap, windowed and zero-padded to `NFFT`).
fn stft_mag_sq(signal: &[f64]) -> Vec<Vec<f64>> {
    let hop = N_FRAME / 2;
    let w = trimmed_hann(N_FRAME);
    if signal.len() < N_FRAME {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(NFFT);
    let mut out = Vec::new();
    let mut buf = vec![Complex64::default(); NFFT];
    let mut start = 0;
    while start + N_FRAME <= signal.len() {
        for j in 0..N_FRAME {
            buf[j] = Complex64::new(signal[start + j] * w[j], 0.0);
        }
        for b in buf.iter_mut().skip(N_FRAME) {
            *b = Complex64::default();
        }
        fft.process(&mut buf);
        out.push(buf[..NFFT / 2 + 1].iter().map(|c| c.norm_sqr()).collect());
        start += hop;
    }
    out
}

/// Binary band-assignment matrix: for each one-third-octave band, the FFT
/// bins between its snapped lower and upper edge frequencies.
fn third_octave_band_matrix() -> Vec<(usize, usize)> {
    let freqs: Vec<f64> = (0..=NFFT / 2)
        .map(|i| i as f64 * STOI_FS as f64 / NFFT as f64)
        .collect();
    let nearest = |target: f64| -> usize {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, &f) in freqs.iter().enumerate() {
            let d = (f - target) * (f - target);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    };
    (0..NUM_BANDS)
        .map(|k| {
            let low = MIN_FREQ * 2f64.powf((2.0 * k as f64 - 1.0) / 6.0);
            let high = MIN_FREQ * 2f64.powf((2.0 * k as f64 + 1.0) / 6.0);
            (nearest(low), nearest(high))
        })
        .collect()
}

/// Per-frame one-third-octave band magnitudes.
fn band_magnitudes(spec: &[Vec<f64>], obm: &[(usize, usize)]) -> Vec<Vec<f64>> {
    spec.iter()
        .map(|frame| {
            obm.iter()
                .map(|&(lo, hi)| frame[lo..hi].iter().sum::<f64>().sqrt())
                .collect()
        })
        .collect()
}

// ---- polyphase resampler -------------------------------------------------

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..64 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-21 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Kaiser-windowed sinc anti-aliasing filter for a p/q rate change
/// (60 dB stopband rejection). Cutoff sits at `1/(2 max(p, q))` of the
/// upsampled rate, i.e. 5 kHz for 16 kHz -> 10 kHz.
fn design_filter(p: usize, q: usize) -> Vec<f64> {
    let pq_max = p.max(q) as f64;
    let cutoff = 1.0 / (2.0 * pq_max);
    let roll_off = cutoff / 10.0;
    let rejection_db = 60.0;
    let l = (rejection_db / (22.9 * roll_off)).ceil() as i64;
    let beta = 0.1102 * (rejection_db - 8.7);
    let m = (2 * l + 1) as f64;
    (-l..=l)
        .map(|t| {
            let ideal = 2.0 * p as f64 * cutoff * sinc(2.0 * cutoff * t as f64);
            let frac = 2.0 * (t + l) as f64 / (m - 1.0) - 1.0;
            let kaiser = bessel_i0(beta * (1.0 - frac * frac).max(0.0).sqrt()) / bessel_i0(beta);
            ideal * kaiser
        })
        .collect()
}

/// Polyphase resampling from `from_rate` to `to_rate`, group delay
/// compensated, output length `ceil(n * up / down)`.
pub fn resample(x: &[f64], to_rate: usize, from_rate: usize) -> Vec<f64> {
    let g = gcd(to_rate, from_rate);
    let up = to_rate / g;
    let down = from_rate / g;
    if up == down {
        return x.to_vec();
    }
    let h = design_filter(up, down);
    let h_sum: f64 = h.iter().sum();
    // Unit DC gain, then compensate the 1/up loss from zero stuffing.
    let eff: Vec<f64> = h.iter().map(|&v| v / h_sum * up as f64).collect();
    let half = (eff.len() - 1) / 2;
    let taps = eff.len() as i64;

    let n = x.len() as i64;
    let n_out = (x.len() * up).div_ceil(down);
    let (up_i, down_i) = (up as i64, down as i64);
    let mut out = Vec::with_capacity(n_out);
    for k in 0..n_out as i64 {
        let u = k * down_i + half as i64; // position in the upsampled stream
        let i_min = ((u - (taps - 1)) + up_i - 1).div_euclid(up_i).max(0);
        let i_max = (u.div_euclid(up_i)).min(n - 1);
        let mut acc = 0.0;
        for i in i_min..=i_max {
            acc += x[i as usize] * eff[(u - i * up_i) as usize];
        }
        out.push(acc);
    }
    out
}
