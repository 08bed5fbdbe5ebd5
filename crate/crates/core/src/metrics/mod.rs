//! Objective evaluation: STOI, segmental SNR, relative-improvement
//! arithmetic, and per-condition report tables.

pub mod stoi;

pub use stoi::{resample, stoi, StoiConfig};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::audio::AudioClip;
use crate::error::{Error, Result};

/// Frame length for segmental SNR (32 ms at 16 kHz).
const SEGSNR_FRAME: usize = 512;
/// Per-frame clamp range in dB.
const SEGSNR_MIN_DB: f64 = -10.0;
const SEGSNR_MAX_DB: f64 = 35.0;
/// Clean frames with energy at or below this are excluded as silent.
const SILENT_FRAME_ENERGY: f64 = 1e-12;

/// Mean over 32 ms frames of `10*log10(sum s^2 / sum (s - s_hat)^2)`,
/// per-frame values clamped to `[-10, 35]` dB, silent clean frames
/// excluded. The processed clip is truncated or zero-padded to the clean
/// clip's length first.
pub fn segmental_snr(clean: &AudioClip, processed: &AudioClip) -> Result<f64> {
    if clean.is_empty() {
        return Err(Error::LengthZero);
    }
    clean.validate("segsnr clean")?;
    processed.validate("segsnr processed")?;

    let mut proc = processed.samples.clone();
    proc.resize(clean.len(), 0.0);

    let mut total = 0.0;
    let mut frames = 0usize;
    let mut start = 0;
    while start + SEGSNR_FRAME <= clean.len() {
        let s = &clean.samples[start..start + SEGSNR_FRAME];
        let p = &proc[start..start + SEGSNR_FRAME];
        let signal: f64 = s.iter().map(|v| v * v).sum();
        if signal > SILENT_FRAME_ENERGY {
            let error: f64 = s.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
            let db = if error == 0.0 {
                SEGSNR_MAX_DB
            } else {
                (10.0 * (signal / error).log10()).clamp(SEGSNR_MIN_DB, SEGSNR_MAX_DB)
            };
            total += db;
            frames += 1;
        }
        start += SEGSNR_FRAME;
    }
    if frames == 0 {
        return Err(Error::SilentReference);
    }
    Ok(total / frames as f64)
}

/// `(a - b) / b`.
pub fn relative_improvement(score_a: f64, score_b: f64) -> Result<f64> {
    if score_b == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((score_a - score_b) / score_b)
}

/// One scored utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredEntry {
    pub method: String,
    /// Mixture SNR of the condition, when known.
    pub snr_db: Option<f64>,
    pub stoi: f64,
    pub segsnr_db: f64,
}

/// Scores a (clean, processed) pair with both metrics.
pub fn score_pair(
    method: impl Into<String>,
    snr_db: Option<f64>,
    clean: &AudioClip,
    processed: &AudioClip,
) -> Result<ScoredEntry> {
    Ok(ScoredEntry {
        method: method.into(),
        snr_db,
        stoi: stoi(clean, processed)?,
        segsnr_db: segmental_snr(clean, processed)?,
    })
}

/// One aggregated report row.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    /// `None` marks the pooled row over all conditions of the method.
    pub snr_db: Option<f64>,
    pub count: usize,
    pub stoi_mean: f64,
    pub segsnr_mean_db: f64,
    pub stoi_rel_improvement: Option<f64>,
    pub segsnr_rel_improvement: Option<f64>,
}

/// Per-condition means with relative improvements against a named
/// baseline method.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub baseline: Option<String>,
}

/// Canonical method ordering in rendered tables; unknown methods follow
/// in first-seen order.
const METHOD_ORDER: [&str; 4] = ["noisy", "mmse", "ddae", "fcn"];

fn method_rank(name: &str, first_seen: &[String]) -> (usize, usize) {
    let lower = name.to_ascii_lowercase();
    for (i, m) in METHOD_ORDER.iter().enumerate() {
        if lower == *m {
            return (i, 0);
        }
    }
    let seen = first_seen.iter().position(|m| m == name).unwrap_or(0);
    (METHOD_ORDER.len(), seen)
}

/// Builds the report: per-(method, SNR) means plus a pooled row per
/// method, with relative improvements against the baseline row of the
/// same condition.
pub fn build_report(entries: &[ScoredEntry], baseline: Option<&str>) -> Result<EvalReport> {
    if entries.is_empty() {
        return Err(Error::EmptyEntries);
    }

    #[derive(Default)]
    struct Acc {
        n: usize,
        stoi: f64,
        segsnr: f64,
    }
    // Key: (method, Some(snr-bits)) and (method, None) for the pooled row.
    let mut acc: BTreeMap<(String, Option<u64>), Acc> = BTreeMap::new();
    let mut first_seen: Vec<String> = Vec::new();
    for e in entries {
        if !first_seen.contains(&e.method) {
            first_seen.push(e.method.clone());
        }
        for key in [
            (e.method.clone(), e.snr_db.map(f64::to_bits)),
            (e.method.clone(), None),
        ] {
            // A condition-less entry and the pooled row share a key; that
            // is fine, they aggregate the same values.
            let a = acc.entry(key).or_default();
            a.n += 1;
            a.stoi += e.stoi;
            a.segsnr += e.segsnr_db;
        }
        // Entries without a condition would double-count themselves above.
        if e.snr_db.is_none() {
            let a = acc
                .get_mut(&(e.method.clone(), None))
                .expect("pooled row exists");
            a.n -= 1;
            a.stoi -= e.stoi;
            a.segsnr -= e.segsnr_db;
        }
    }

    let mean_of = |key: &(String, Option<u64>)| -> Option<(f64, f64)> {
        acc.get(key)
            .filter(|a| a.n > 0)
            .map(|a| (a.stoi / a.n as f64, a.segsnr / a.n as f64))
    };

    let mut rows = Vec::new();
    for ((method, snr_bits), a) in &acc {
        if a.n == 0 {
            continue;
        }
        let stoi_mean = a.stoi / a.n as f64;
        let segsnr_mean = a.segsnr / a.n as f64;
        let (mut stoi_rel, mut segsnr_rel) = (None, None);
        if let Some(base) = baseline {
            if base != method {
                if let Some((b_stoi, b_segsnr)) = mean_of(&(base.to_string(), *snr_bits)) {
                    stoi_rel = relative_improvement(stoi_mean, b_stoi).ok();
                    segsnr_rel = relative_improvement(segsnr_mean, b_segsnr).ok();
                }
            }
        }
        rows.push(ReportRow {
            method: method.clone(),
            snr_db: snr_bits.map(f64::from_bits),
            count: a.n,
            stoi_mean,
            segsnr_mean_db: segsnr_mean,
            stoi_rel_improvement: stoi_rel,
            segsnr_rel_improvement: segsnr_rel,
        });
    }

    rows.sort_by(|a, b| {
        method_rank(&a.method, &first_seen)
            .cmp(&method_rank(&b.method, &first_seen))
            .then(a.method.cmp(&b.method))
            .then(match (a.snr_db, b.snr_db) {
                (Some(x), Some(y)) => x.total_cmp(&y),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            })
    });
    Ok(EvalReport {
        rows,
        baseline: baseline.map(str::to_string),
    })
}

impl EvalReport {
    /// The pooled row of a method, if present.
    pub fn pooled_row(&self, method: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.snr_db.is_none())
    }

    /// Aligned plain-text table.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let base = self.baseline.as_deref().unwrap_or("-");
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>6} {:>10} {:>12} {:>12} {:>12}",
            "method", "snr_db", "n", "stoi", "segsnr_db", "d_stoi%", "d_segsnr%"
        );
        for r in &self.rows {
            let snr = r
                .snr_db
                .map(|s| format!("{s}"))
                .unwrap_or_else(|| "all".into());
            let rel = |v: Option<f64>| {
                v.map(|x| format!("{:+.2}", 100.0 * x))
                    .unwrap_or_else(|| "-".into())
            };
            let _ = writeln!(
                out,
                "{:<16} {:>8} {:>6} {:>10.4} {:>12.4} {:>12} {:>12}",
                r.method,
                snr,
                r.count,
                r.stoi_mean,
                r.segsnr_mean_db,
                rel(r.stoi_rel_improvement),
                rel(r.segsnr_rel_improvement)
            );
        }
        let _ = writeln!(out, "baseline: {base}");
        out
    }

    /// CSV with one row per report row.
    pub fn render_csv(&self) -> String {
        let mut out = String::from(
            "method,snr_db,n,stoi_mean,segsnr_mean_db,stoi_rel_improvement_vs_baseline,segsnr_rel_improvement_vs_baseline\n",
        );
        for r in &self.rows {
            let snr = r.snr_db.map(|s| format!("{s}")).unwrap_or_default();
            let rel = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{:.6},{},{}",
                r.method,
                snr,
                r.count,
                r.stoi_mean,
                r.segsnr_mean_db,
                rel(r.stoi_rel_improvement),
                rel(r.segsnr_rel_improvement)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::REQUIRED_SAMPLE_RATE;
    use crate::synthetic::{speech_like, white_noise};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_signals_hit_the_clamp_ceiling() {
        let x = speech_like(3, 1.0);
        assert_eq!(segmental_snr(&x, &x).unwrap(), 35.0);
    }

    #[test]
    fn per_frame_ten_db_noise_measures_ten_db() {
        // Noise scaled per frame to sit exactly 10 dB below the clean
        // frame power.
        let x = speech_like(5, 1.2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut processed = x.samples.clone();
        let mut start = 0;
        while start + SEGSNR_FRAME <= x.len() {
            let frame = &x.samples[start..start + SEGSNR_FRAME];
            let signal: f64 = frame.iter().map(|v| v * v).sum();
            if signal > SILENT_FRAME_ENERGY {
                let noise: Vec<f64> =
                    (0..SEGSNR_FRAME).map(|_| rng.random_range(-1.0..1.0)).collect();
                let noise_power: f64 = noise.iter().map(|v| v * v).sum();
                let k = (signal / (noise_power * 10.0)).sqrt();
                for (p, v) in processed[start..start + SEGSNR_FRAME].iter_mut().zip(&noise) {
                    *p += k * v;
                }
            }
            start += SEGSNR_FRAME;
        }
        let got = segmental_snr(&x, &AudioClip::new(processed, REQUIRED_SAMPLE_RATE)).unwrap();
        assert!((got - 10.0).abs() < 0.5, "{got}");
    }

    #[test]
    fn sign_flip_is_minus_six_db() {
        // error = 2s => error power = 4x signal power => -6.02 dB.
        let x = speech_like(2, 1.0);
        let flipped = AudioClip::new(x.samples.iter().map(|s| -s).collect(), REQUIRED_SAMPLE_RATE);
        let got = segmental_snr(&x, &flipped).unwrap();
        assert!((got + 6.02).abs() < 0.1, "{got}");
    }

    #[test]
    fn any_error_strictly_decreases_segsnr() {
        let x = speech_like(4, 1.0);
        let mut bent = x.samples.clone();
        for s in bent.iter_mut().skip(4000).take(2000) {
            *s += 0.05;
        }
        let got = segmental_snr(&x, &AudioClip::new(bent, REQUIRED_SAMPLE_RATE)).unwrap();
        assert!(got < 35.0);
    }

    #[test]
    fn silent_clean_rejected() {
        let silent = AudioClip::new(vec![0.0; 4096], REQUIRED_SAMPLE_RATE);
        let y = white_noise(1, 0.25, 0.1);
        assert!(matches!(
            segmental_snr(&silent, &y),
            Err(Error::SilentReference)
        ));
    }

    #[test]
    fn relative_improvement_paper_arithmetic() {
        let r = relative_improvement(0.8256, 0.7858).unwrap();
        assert!((r - 0.0506).abs() < 1e-4, "{r}");
        let r = relative_improvement(2.6870, 2.3888).unwrap();
        assert!((r - 0.1248).abs() < 1e-4, "{r}");
        assert_eq!(relative_improvement(0.5, 0.5).unwrap(), 0.0);
        assert!(matches!(
            relative_improvement(1.0, 0.0),
            Err(Error::ZeroBaseline)
        ));
        // Antisymmetric sign around equal inputs.
        assert!(relative_improvement(0.6, 0.5).unwrap() > 0.0);
        assert!(relative_improvement(0.4, 0.5).unwrap() < 0.0);
    }

    #[test]
    fn single_entry_report() {
        let entries = vec![ScoredEntry {
            method: "fcn".into(),
            snr_db: Some(0.0),
            stoi: 0.8,
            segsnr_db: 6.0,
        }];
        let rep = build_report(&entries, None).unwrap();
        assert_eq!(rep.rows.len(), 2); // condition row + pooled row
        assert_eq!(rep.rows[0].stoi_mean, 0.8);
        assert_eq!(rep.rows[0].count, 1);
        assert!(matches!(build_report(&[], None), Err(Error::EmptyEntries)));
    }

    #[test]
    fn identical_methods_get_identical_rows() {
        let mk = |method: &str| ScoredEntry {
            method: method.into(),
            snr_db: Some(5.0),
            stoi: 0.71,
            segsnr_db: 4.2,
        };
        let rep = build_report(&[mk("a"), mk("b")], None).unwrap();
        let a: Vec<_> = rep.rows.iter().filter(|r| r.method == "a").collect();
        let b: Vec<_> = rep.rows.iter().filter(|r| r.method == "b").collect();
        assert_eq!(a[0].stoi_mean, b[0].stoi_mean);
        assert_eq!(a[0].segsnr_mean_db, b[0].segsnr_mean_db);
    }

    #[test]
    fn published_means_reproduce_published_improvements() {
        let table = [
            ("Noisy", 0.7392, 1.7976),
            ("SE", 0.7858, 2.3888),
            ("MA(N)+SE", 0.8256, 2.6870),
            ("MA(S)+SE", 0.8089, 2.4681),
            ("MA(N+S)+SE", 0.8317, 2.6572),
        ];
        let entries: Vec<ScoredEntry> = table
            .iter()
            .map(|(m, s, p)| ScoredEntry {
                method: m.to_string(),
                snr_db: None,
                stoi: *s,
                segsnr_db: *p,
            })
            .collect();
        let rep = build_report(&entries, Some("SE")).unwrap();
        let expected = [
            ("MA(N)+SE", 0.0506, 0.1248),
            ("MA(S)+SE", 0.0294, 0.0332),
            ("MA(N+S)+SE", 0.0584, 0.1124),
        ];
        for (method, stoi_rel, segsnr_rel) in expected {
            let row = rep.pooled_row(method).unwrap();
            let got_stoi = row.stoi_rel_improvement.unwrap();
            let got_seg = row.segsnr_rel_improvement.unwrap();
            // Within 0.01 percentage points of the published arithmetic.
            assert!((got_stoi - stoi_rel).abs() < 1e-4, "{method}: {got_stoi}");
            assert!((got_seg - segsnr_rel).abs() < 1e-4, "{method}: {got_seg}");
        }
        let csv = rep.render_csv();
        assert!(csv.lines().count() == 6);
        assert!(csv.starts_with("method,snr_db,n,"));
    }

    #[test]
    fn methods_render_in_canonical_order() {
        let mk = |m: &str| ScoredEntry {
            method: m.into(),
            snr_db: None,
            stoi: 0.5,
            segsnr_db: 1.0,
        };
        let rep = build_report(&[mk("fcn"), mk("Noisy"), mk("adapted"), mk("mmse")], None).unwrap();
        let order: Vec<&str> = rep.rows.iter().map(|r| r.method.as_str()).collect();
        assert_eq!(order, vec!["Noisy", "mmse", "fcn", "adapted"]);
    }
}
