//! Short-time Fourier analysis: framing, windowing, FFT, overlap-add
//! inverse, log-magnitude features, and spectrogram export.
//!
//! Analysis uses a periodic Hann window at 50% overlap by default. The
//! signal is padded internally with one hop of leading zeros so that the
//! first samples fall under nonzero window values; `istft` removes the
//! padding and truncates to the recorded original length, which makes
//! `istft(stft(x))` reproduce `x` to double-precision rounding.

use std::io::Write;
use std::path::Path;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::audio::{AudioClip, REQUIRED_SAMPLE_RATE};
use crate::error::{Error, Result};

/// Magnitude floor applied before taking logarithms, keeping features finite.
pub const EPS_MAG: f64 = 1e-10;

/// Maximum relative deviation tolerated in the constant-overlap-add check.
const COLA_TOL: f64 = 1e-10;

/// Analysis window kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WindowKind {
    /// Periodic Hann, `0.5 * (1 - cos(2*pi*n/N))`. Exact COLA at any hop
    /// that divides the frame length.
    HannPeriodic,
    /// All-ones window. COLA when the hop divides the frame length.
    Rectangular,
}

/// STFT analysis/synthesis parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StftConfig {
    pub frame_len: usize,
    pub hop: usize,
    pub fft_size: usize,
    pub window: WindowKind,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            frame_len: 512,
            hop: 256,
            fft_size: 512,
            window: WindowKind::HannPeriodic,
        }
    }
}

impl StftConfig {
    /// Number of one-sided frequency bins.
    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Validates ranges and the constant-overlap-add property of the
    /// window/hop pair.
    pub fn validate(&self) -> Result<()> {
        if self.hop == 0 || self.hop > self.frame_len || self.frame_len > self.fft_size {
            return Err(Error::InvalidConfig(format!(
                "need 0 < hop <= frame_len <= fft_size, got hop={} frame_len={} fft_size={}",
                self.hop, self.frame_len, self.fft_size
            )));
        }
        // Overlap-added window sum must be constant across hop phases.
        let w = window_samples(self.window, self.frame_len);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for phase in 0..self.hop {
            let mut acc = 0.0;
            let mut j = phase;
            while j < self.frame_len {
                acc += w[j];
                j += self.hop;
            }
            lo = lo.min(acc);
            hi = hi.max(acc);
        }
        if hi <= 0.0 || (hi - lo) / hi > COLA_TOL {
            return Err(Error::InvalidConfig(format!(
                "window/hop pair violates constant overlap-add (sum ranges {lo:.6}..{hi:.6})"
            )));
        }
        Ok(())
    }
}

/// Window sample values for `kind` of length `len`.
pub fn window_samples(kind: WindowKind, len: usize) -> Vec<f64> {
    match kind {
        WindowKind::HannPeriodic => (0..len)
            .map(|n| 0.5 * (1.0 - (std::f64::consts::TAU * n as f64 / len as f64).cos()))
            .collect(),
        WindowKind::Rectangular => vec![1.0; len],
    }
}

/// One-sided complex STFT matrix indexed `[bin m, frame l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    /// Frame-major storage: `data[l * num_bins + m]`.
    data: Vec<Complex64>,
    num_bins: usize,
    num_frames: usize,
    pub config: StftConfig,
    /// Length of the analyzed waveform, restored by `istft`.
    pub num_samples: usize,
}

impl Spectrogram {
    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn bin(&self, m: usize, l: usize) -> Complex64 {
        self.data[l * self.num_bins + m]
    }

    /// One frame's one-sided spectrum.
    pub fn frame(&self, l: usize) -> &[Complex64] {
        &self.data[l * self.num_bins..(l + 1) * self.num_bins]
    }

    /// Builds a spectrogram from per-frame one-sided spectra.
    pub fn from_frames(
        frames: Vec<Vec<Complex64>>,
        config: StftConfig,
        num_samples: usize,
    ) -> Result<Self> {
        let num_bins = config.num_bins();
        let num_frames = frames.len();
        let mut data = Vec::with_capacity(num_bins * num_frames);
        for f in &frames {
            if f.len() != num_bins {
                return Err(Error::ShapeMismatch(format!(
                    "frame has {} bins, config implies {}",
                    f.len(),
                    num_bins
                )));
            }
            data.extend_from_slice(f);
        }
        Ok(Spectrogram {
            data,
            num_bins,
            num_frames,
            config,
            num_samples,
        })
    }

    /// Elementwise product with a real gain matrix of identical shape.
    pub fn scaled_by(&self, gains: &[f64]) -> Result<Spectrogram> {
        if gains.len() != self.data.len() {
            return Err(Error::ShapeMismatch(format!(
                "gain matrix has {} entries, spectrogram has {}",
                gains.len(),
                self.data.len()
            )));
        }
        let data = self
            .data
            .iter()
            .zip(gains)
            .map(|(b, &g)| b * g)
            .collect();
        Ok(Spectrogram {
            data,
            num_bins: self.num_bins,
            num_frames: self.num_frames,
            config: self.config,
            num_samples: self.num_samples,
        })
    }

    fn validate_finite(&self) -> Result<()> {
        if self
            .data
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
        {
            Ok(())
        } else {
            Err(Error::NonFiniteValue("spectrogram bins".into()))
        }
    }
}

/// Real log-magnitude features plus phases, same `[m, l]` indexing as the
/// spectrogram they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LogMagFeatures {
    /// Frame-major natural-log magnitudes: `values[l * num_bins + m]`.
    pub values: Vec<f64>,
    /// Frame-major phases in radians.
    pub phase: Vec<f64>,
    pub num_bins: usize,
    pub num_frames: usize,
    pub config: StftConfig,
    pub num_samples: usize,
}

impl LogMagFeatures {
    /// One frame's log-magnitude vector.
    pub fn frame_values(&self, l: usize) -> &[f64] {
        &self.values[l * self.num_bins..(l + 1) * self.num_bins]
    }
}

/// Number of analysis frames for a waveform of `n` samples (after the
/// internal one-hop lead-in pad).
fn frame_count(n: usize, cfg: &StftConfig) -> usize {
    let padded = n + cfg.hop;
    if padded <= cfg.frame_len {
        1
    } else {
        (padded - cfg.frame_len).div_ceil(cfg.hop) + 1
    }
}

/// Short-time Fourier transform.
pub fn stft(clip: &AudioClip, cfg: &StftConfig) -> Result<Spectrogram> {
    cfg.validate()?;
    clip.validate("stft input")?;

    let n = clip.samples.len();
    let pad = cfg.hop;
    let num_frames = frame_count(n, cfg);
    let num_bins = cfg.num_bins();
    let w = window_samples(cfg.window, cfg.frame_len);

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(cfg.fft_size);

    let mut data = Vec::with_capacity(num_frames * num_bins);
    let mut buf = vec![Complex64::default(); cfg.fft_size];
    for l in 0..num_frames {
        let start = l * cfg.hop; // position in the padded signal
        for j in 0..cfg.frame_len {
            let idx = start + j;
            let s = if idx < pad || idx - pad >= n {
                0.0
            } else {
                clip.samples[idx - pad]
            };
            buf[j] = Complex64::new(s * w[j], 0.0);
        }
        for b in buf.iter_mut().skip(cfg.frame_len) {
            *b = Complex64::default();
        }
        fft.process(&mut buf);
        data.extend_from_slice(&buf[..num_bins]);
    }

    let spec = Spectrogram {
        data,
        num_bins,
        num_frames,
        config: *cfg,
        num_samples: n,
    };
    spec.validate_finite()?;
    Ok(spec)
}

/// Inverse STFT: weighted overlap-add with window-squared normalization,
/// truncated to the recorded original length.
pub fn istft(spec: &Spectrogram) -> Result<AudioClip> {
    let cfg = &spec.config;
    cfg.validate()?;
    spec.validate_finite()?;

    let pad = cfg.hop;
    let w = window_samples(cfg.window, cfg.frame_len);
    let synth_len = (spec.num_frames.saturating_sub(1)) * cfg.hop + cfg.frame_len;

    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(cfg.fft_size);

    let mut acc = vec![0.0f64; synth_len];
    let mut den = vec![0.0f64; synth_len];
    let mut buf = vec![Complex64::default(); cfg.fft_size];
    let scale = 1.0 / cfg.fft_size as f64;
    for l in 0..spec.num_frames {
        let frame = spec.frame(l);
        buf[..spec.num_bins].copy_from_slice(frame);
        // Hermitian extension of the one-sided spectrum.
        for m in spec.num_bins..cfg.fft_size {
            buf[m] = frame[cfg.fft_size - m].conj();
        }
        ifft.process(&mut buf);
        let start = l * cfg.hop;
        for j in 0..cfg.frame_len {
            acc[start + j] += w[j] * buf[j].re * scale;
            den[start + j] += w[j] * w[j];
        }
    }

    let mut samples = Vec::with_capacity(spec.num_samples);
    for i in 0..spec.num_samples {
        let idx = pad + i;
        if idx < synth_len && den[idx] > 1e-12 {
            samples.push(acc[idx] / den[idx]);
        } else {
            samples.push(0.0);
        }
    }
    Ok(AudioClip::new(samples, REQUIRED_SAMPLE_RATE))
}

/// Natural-log magnitudes (floored at [`EPS_MAG`]) plus phases.
pub fn log_magnitude(spec: &Spectrogram) -> LogMagFeatures {
    let mut values = Vec::with_capacity(spec.data.len());
    let mut phase = Vec::with_capacity(spec.data.len());
    for b in &spec.data {
        values.push(b.norm().max(EPS_MAG).ln());
        phase.push(b.arg());
    }
    LogMagFeatures {
        values,
        phase,
        num_bins: spec.num_bins,
        num_frames: spec.num_frames,
        config: spec.config,
        num_samples: spec.num_samples,
    }
}

/// Rebuilds a complex spectrogram from log-magnitudes and phases; inverse
/// of [`log_magnitude`] up to the magnitude floor.
pub fn features_to_spectrogram(feat: &LogMagFeatures) -> Spectrogram {
    let data = feat
        .values
        .iter()
        .zip(&feat.phase)
        .map(|(&v, &p)| Complex64::from_polar(v.exp(), p))
        .collect();
    Spectrogram {
        data,
        num_bins: feat.num_bins,
        num_frames: feat.num_frames,
        config: feat.config,
        num_samples: feat.num_samples,
    }
}

/// dB magnitudes of a spectrogram, frame-major like its bins.
pub fn db_magnitudes(spec: &Spectrogram) -> Vec<f64> {
    spec.data
        .iter()
        .map(|b| 20.0 * b.norm().max(EPS_MAG).log10())
        .collect()
}

/// Writes a grayscale spectrogram raster (binary PGM, time on x, frequency
/// on y with the highest bin at the top, dynamic range clamped to
/// `[peak - 80 dB, peak]`) at `image_path`, plus a CSV of unclamped dB
/// magnitudes at the same path with a `.csv` extension.
///
/// The CSV has a header row of frame-center times in seconds, then one row
/// per frequency bin in ascending bin order.
pub fn export_spectrogram(spec: &Spectrogram, image_path: impl AsRef<Path>) -> Result<()> {
    let image_path = image_path.as_ref();
    let csv_path = image_path.with_extension("csv");
    let db = db_magnitudes(spec);
    let peak = db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let floor = peak - 80.0;

    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::IoFailure {
            path: path.clone(),
            source,
        }
    };

    let mut img = Vec::new();
    img.extend_from_slice(format!("P5\n{} {}\n255\n", spec.num_frames, spec.num_bins).as_bytes());
    for row in (0..spec.num_bins).rev() {
        for l in 0..spec.num_frames {
            let v = db[l * spec.num_bins + row].clamp(floor, peak);
            let pixel = ((v - floor) / 80.0 * 255.0).round().clamp(0.0, 255.0) as u8;
            img.push(pixel);
        }
    }
    std::fs::write(image_path, img).map_err(io_err(image_path))?;

    let file = std::fs::File::create(&csv_path).map_err(io_err(&csv_path))?;
    let mut wtr = std::io::BufWriter::new(file);
    let times: Vec<String> = (0..spec.num_frames)
        .map(|l| format!("{:.6}", l as f64 * spec.config.hop as f64 / REQUIRED_SAMPLE_RATE as f64))
        .collect();
    writeln!(wtr, "{}", times.join(",")).map_err(io_err(&csv_path))?;
    for m in 0..spec.num_bins {
        let row: Vec<String> = (0..spec.num_frames)
            .map(|l| format!("{:.9}", db[l * spec.num_bins + m]))
            .collect();
        writeln!(wtr, "{}", row.join(",")).map_err(io_err(&csv_path))?;
    }
    wtr.flush().map_err(io_err(&csv_path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn white_noise(n: usize, seed: u64) -> AudioClip {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        AudioClip::new(samples, REQUIRED_SAMPLE_RATE)
    }

    fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        (num / den.max(1e-300)).sqrt()
    }

    #[test]
    fn default_config_is_cola() {
        StftConfig::default().validate().unwrap();
    }

    #[test]
    fn non_cola_hop_rejected() {
        let cfg = StftConfig {
            hop: 170,
            ..StftConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn round_trip_white_noise_exact() {
        let cfg = StftConfig::default();
        let clip = white_noise(16_000, 7);
        let back = istft(&stft(&clip, &cfg).unwrap()).unwrap();
        assert_eq!(back.len(), clip.len());
        let max_err = clip
            .samples
            .iter()
            .zip(&back.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-10, "max abs err {max_err}");
        assert!(rel_l2(&back.samples, &clip.samples) < 1e-10);
    }

    #[test]
    fn round_trip_short_clip_zero_padded_to_one_frame() {
        let cfg = StftConfig::default();
        let clip = white_noise(200, 3);
        let spec = stft(&clip, &cfg).unwrap();
        let back = istft(&spec).unwrap();
        assert_eq!(back.len(), 200);
        assert!(rel_l2(&back.samples, &clip.samples) < 1e-10);
    }

    #[test]
    fn all_zero_clip_gives_all_zero_spectrogram() {
        let cfg = StftConfig::default();
        let clip = AudioClip::new(vec![0.0; 4000], REQUIRED_SAMPLE_RATE);
        let spec = stft(&clip, &cfg).unwrap();
        for l in 0..spec.num_frames() {
            assert!(spec.frame(l).iter().all(|c| c.norm() == 0.0));
        }
        let back = istft(&spec).unwrap();
        assert!(back.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn stft_is_linear() {
        let cfg = StftConfig::default();
        let a = white_noise(5000, 1);
        let b = white_noise(5000, 2);
        let sum = AudioClip::new(
            a.samples.iter().zip(&b.samples).map(|(x, y)| x + y).collect(),
            REQUIRED_SAMPLE_RATE,
        );
        let sa = stft(&a, &cfg).unwrap();
        let sb = stft(&b, &cfg).unwrap();
        let ss = stft(&sum, &cfg).unwrap();
        let scale: f64 = ss.data.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (i, c) in ss.data.iter().enumerate() {
            let d = (c - (sa.data[i] + sb.data[i])).norm();
            assert!(d / scale < 1e-10, "bin {i}: {d}");
        }
    }

    #[test]
    fn bin_centered_cosine_concentrates_energy() {
        let k = 32usize;
        let freq = k as f64 * REQUIRED_SAMPLE_RATE as f64 / 512.0;
        let n = 8192;
        let samples: Vec<f64> = (0..n)
            .map(|i| 0.7 * (TAU * freq * i as f64 / REQUIRED_SAMPLE_RATE as f64).cos())
            .collect();
        let clip = AudioClip::new(samples, REQUIRED_SAMPLE_RATE);

        // Rectangular window resolves a bin-centered tone into exactly one row.
        let rect = StftConfig {
            window: WindowKind::Rectangular,
            hop: 256,
            ..StftConfig::default()
        };
        let spec = stft(&clip, &rect).unwrap();
        for l in 2..spec.num_frames() - 2 {
            let frame = spec.frame(l);
            let total: f64 = one_sided_energy(frame, 512);
            let row = 2.0 * frame[k].norm_sqr();
            assert!(row / total >= 0.99, "frame {l}: {}", row / total);
        }

        // The default Hann window spreads a tone over rows k-1..k+1.
        let hann = StftConfig::default();
        let spec = stft(&clip, &hann).unwrap();
        for l in 2..spec.num_frames() - 2 {
            let frame = spec.frame(l);
            let total: f64 = one_sided_energy(frame, 512);
            let rows: f64 = (k - 1..=k + 1).map(|m| 2.0 * frame[m].norm_sqr()).sum();
            assert!(rows / total >= 0.99, "frame {l}: {}", rows / total);
        }
    }

    /// Spectrum energy with one-sided bin doubling (DC and Nyquist counted once).
    fn one_sided_energy(frame: &[Complex64], fft_size: usize) -> f64 {
        let nyquist = fft_size / 2;
        frame
            .iter()
            .enumerate()
            .map(|(m, c)| {
                let w = if m == 0 || m == nyquist { 1.0 } else { 2.0 };
                w * c.norm_sqr()
            })
            .sum()
    }

    #[test]
    fn parseval_per_frame() {
        let cfg = StftConfig::default();
        let clip = white_noise(6000, 11);
        let spec = stft(&clip, &cfg).unwrap();
        let w = window_samples(cfg.window, cfg.frame_len);
        let pad = cfg.hop;
        for l in 0..spec.num_frames() {
            let mut time_energy = 0.0;
            for j in 0..cfg.frame_len {
                let idx = l * cfg.hop + j;
                let s = if idx < pad || idx - pad >= clip.len() {
                    0.0
                } else {
                    clip.samples[idx - pad]
                };
                time_energy += (s * w[j]).powi(2);
            }
            let spec_energy = one_sided_energy(spec.frame(l), cfg.fft_size) / cfg.fft_size as f64;
            if time_energy > 0.0 {
                let rel = (time_energy - spec_energy).abs() / time_energy;
                assert!(rel < 1e-9, "frame {l}: rel {rel}");
            }
        }
    }

    #[test]
    fn log_magnitude_fixed_points() {
        let cfg = StftConfig::default();
        let frames = vec![vec![
            Complex64::new(1.0, 0.0);
            cfg.num_bins()
        ]];
        let mut f0 = frames;
        f0[0][1] = Complex64::new(0.0, 0.0);
        f0[0][2] = Complex64::new(std::f64::consts::E, 0.0);
        let spec = Spectrogram::from_frames(f0, cfg, 512).unwrap();
        let feat = log_magnitude(&spec);
        assert_eq!(feat.values[0], 0.0);
        assert_eq!(feat.values[1], EPS_MAG.ln());
        assert!(feat.values[1].is_finite());
        assert!((feat.values[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn features_invert_for_magnitudes_above_floor() {
        let cfg = StftConfig::default();
        let clip = white_noise(4000, 5);
        let spec = stft(&clip, &cfg).unwrap();
        let feat = log_magnitude(&spec);
        let back = features_to_spectrogram(&feat);
        for (a, b) in spec.data.iter().zip(&back.data) {
            if a.norm() >= EPS_MAG {
                assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_features_zero_phase_give_unit_spectrogram() {
        let cfg = StftConfig::default();
        let nb = cfg.num_bins();
        let feat = LogMagFeatures {
            values: vec![0.0; nb * 3],
            phase: vec![0.0; nb * 3],
            num_bins: nb,
            num_frames: 3,
            config: cfg,
            num_samples: 1024,
        };
        let spec = features_to_spectrogram(&feat);
        assert!(spec.data.iter().all(|c| (c.re - 1.0).abs() < 1e-15 && c.im == 0.0));
    }

    #[test]
    fn export_writes_raster_and_csv() {
        let cfg = StftConfig::default();
        let nb = cfg.num_bins();
        let mut frames = vec![vec![Complex64::default(); nb]; 4];
        frames[2][40] = Complex64::new(3.0, 0.0); // single hot bin (m=40, l=2)
        let spec = Spectrogram::from_frames(frames, cfg, 2048).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let img_path = dir.path().join("spec.pgm");
        export_spectrogram(&spec, &img_path).unwrap();

        let img = std::fs::read(&img_path).unwrap();
        let header = format!("P5\n{} {}\n255\n", 4, nb);
        assert!(img.starts_with(header.as_bytes()));
        let pixels = &img[header.len()..];
        assert_eq!(pixels.len(), 4 * nb);
        // Brightest pixel sits at (row for bin 40, column 2).
        let (mut best, mut best_idx) = (0u8, 0usize);
        for (i, &p) in pixels.iter().enumerate() {
            if p > best {
                best = p;
                best_idx = i;
            }
        }
        let row = best_idx / 4;
        let col = best_idx % 4;
        assert_eq!(row, nb - 1 - 40);
        assert_eq!(col, 2);

        let csv = std::fs::read_to_string(img_path.with_extension("csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + nb);
        let header_times: Vec<f64> = lines[0].split(',').map(|t| t.parse().unwrap()).collect();
        assert_eq!(header_times.len(), 4);
        assert!((header_times[1] - 256.0 / 16_000.0).abs() < 1e-9);
        let cell: f64 = lines[1 + 40].split(',').nth(2).unwrap().parse().unwrap();
        assert!((cell - 20.0 * 3.0f64.log10()).abs() < 1e-9);
        // All-zero bins floor at 20*log10(EPS_MAG).
        let zero_cell: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert!((zero_cell - (-200.0)).abs() < 1e-9);
    }

    #[test]
    fn all_zero_spectrogram_exports_uniform_image() {
        let cfg = StftConfig::default();
        let nb = cfg.num_bins();
        let frames = vec![vec![Complex64::default(); nb]; 3];
        let spec = Spectrogram::from_frames(frames, cfg, 1024).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let img_path = dir.path().join("zero.pgm");
        export_spectrogram(&spec, &img_path).unwrap();
        let img = std::fs::read(&img_path).unwrap();
        let header = format!("P5\n{} {}\n255\n", 3, nb);
        let pixels = &img[header.len()..];
        assert!(pixels.windows(2).all(|w| w[0] == w[1]));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(12))]

        #[test]
        fn prop_round_trip(seed in 0u64..1000, len in 300usize..4000) {
            let cfg = StftConfig::default();
            let clip = white_noise(len, seed);
            let back = istft(&stft(&clip, &cfg).unwrap()).unwrap();
            proptest::prop_assert!(rel_l2(&back.samples, &clip.samples) < 1e-10);
        }

        #[test]
        fn prop_scaled_linearity(seed in 0u64..1000, alpha in -2.0f64..2.0) {
            let cfg = StftConfig::default();
            let a = white_noise(2000, seed);
            let scaled = AudioClip::new(
                a.samples.iter().map(|x| alpha * x).collect(),
                REQUIRED_SAMPLE_RATE,
            );
            let sa = stft(&a, &cfg).unwrap();
            let ss = stft(&scaled, &cfg).unwrap();
            let peak: f64 = sa.data.iter().map(|c| c.norm()).fold(1e-30, f64::max);
            for (x, y) in ss.data.iter().zip(&sa.data) {
                proptest::prop_assert!((x - y * alpha).norm() <= 1e-10 * peak.max(1.0));
            }
        }
    }
}
