//! Pitch, energy and duration extraction, and the prosodic error metrics
//! used to compare two renditions of an utterance.
//!
//! Pitch is tracked with a YIN-style estimator: per frame we compute the
//! squared difference function, normalize it by its cumulative mean, and
//! take the first dip below the aperiodicity threshold (refined to the local
//! minimum and then parabolically interpolated). Frames whose best dip stays
//! above the threshold are unvoiced.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifest::AudioBuffer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProsodyConfig {
    pub window: usize,
    pub hop: usize,
    pub f_min: f64,
    pub f_max: f64,
    /// Frames with normalized aperiodicity below this are voiced.
    pub threshold: f64,
}

impl Default for ProsodyConfig {
    fn default() -> Self {
        Self {
            window: 1024,
            hop: 256,
            f_min: 50.0,
            f_max: 600.0,
            threshold: 0.15,
        }
    }
}

impl ProsodyConfig {
    pub fn validate_for(&self, sample_rate: u32) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.hop == 0 || self.window < self.hop {
            return bad(format!("need window >= hop >= 1, got {}/{}", self.window, self.hop));
        }
        if sample_rate < 8000 {
            return bad(format!("sample rate {sample_rate} below 8000 Hz"));
        }
        let ceiling = 600f64.min(sample_rate as f64 / 4.0);
        if !(self.f_min >= 50.0 && self.f_max <= ceiling && self.f_min < self.f_max) {
            return bad(format!(
                "f0 range [{}, {}] must lie within [50, {ceiling}]",
                self.f_min, self.f_max
            ));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold {} not in (0, 1)", self.threshold));
        }
        Ok(())
    }
}

/// Per-frame RMS over rectangular windows.
pub fn frame_energy(audio: &AudioBuffer, window: usize, hop: usize) -> Result<Vec<f64>> {
    if hop == 0 || window < hop {
        return Err(Error::InvalidArgument(format!(
            "need window >= hop >= 1, got {window}/{hop}"
        )));
    }
    let x = audio.samples();
    if x.len() < window {
        return Err(Error::AudioTooShort {
            samples: x.len(),
            required: window,
        });
    }
    let frames = (x.len() - window) / hop + 1;
    Ok((0..frames)
        .map(|f| {
            let w = &x[f * hop..f * hop + window];
            (w.iter().map(|s| s * s).sum::<f64>() / window as f64).sqrt()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct F0Track {
    pub f0_hz: Vec<f64>,
    pub voiced: Vec<bool>,
    pub periodicity: Vec<f64>,
    pub hop: usize,
    pub sample_rate: u32,
}

impl F0Track {
    pub fn len(&self) -> usize {
        self.f0_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0_hz.is_empty()
    }

    pub fn voiced_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.voiced.iter().filter(|v| **v).count() as f64 / self.len() as f64
    }

    pub fn truncated(&self, frames: usize) -> F0Track {
        let n = frames.min(self.len());
        F0Track {
            f0_hz: self.f0_hz[..n].to_vec(),
            voiced: self.voiced[..n].to_vec(),
            periodicity: self.periodicity[..n].to_vec(),
            hop: self.hop,
            sample_rate: self.sample_rate,
        }
    }

    /// Text form: a `#` header, then `frame f0_hz voiced periodicity` per line.
    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        let io = |e| Error::io("<f0 track output>", e);
        writeln!(out, "# hop={} sample_rate={}", self.hop, self.sample_rate).map_err(io)?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{i} {} {} {}",
                self.f0_hz[i],
                u8::from(self.voiced[i]),
                self.periodicity[i]
            )
            .map_err(io)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<F0Track> {
        let bad = |line: usize, reason: &str| Error::MalformedLine {
            line,
            reason: reason.to_string(),
        };
        let mut hop = None;
        let mut sample_rate = None;
        let mut track = F0Track {
            f0_hz: Vec::new(),
            voiced: Vec::new(),
            periodicity: Vec::new(),
            hop: 0,
            sample_rate: 0,
        };
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for kv in header.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("hop", v)) => hop = v.parse().ok(),
                        Some(("sample_rate", v)) => sample_rate = v.parse().ok(),
                        _ => {}
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [idx, f0, voiced, per] = fields[..] else {
                return Err(bad(n, "expected 4 fields"));
            };
            if idx.parse::<usize>().ok() != Some(track.len()) {
                return Err(bad(n, "frame indices must count up from 0"));
            }
            let f0: f64 = f0.parse().map_err(|_| bad(n, "bad f0"))?;
            let voiced = match voiced {
                "1" | "true" => true,
                "0" | "false" => false,
                _ => return Err(bad(n, "voiced must be 0 or 1")),
            };
            let per: f64 = per.parse().map_err(|_| bad(n, "bad periodicity"))?;
            if !(0.0..=1.0).contains(&per) {
                return Err(bad(n, "periodicity outside [0, 1]"));
            }
            if voiced != (f0 > 0.0) {
                return Err(bad(n, "voiced frames need f0 > 0, unvoiced frames f0 = 0"));
            }
            track.f0_hz.push(f0);
            track.voiced.push(voiced);
            track.periodicity.push(per);
        }
        track.hop = hop.ok_or_else(|| bad(1, "missing `# hop=` header"))?;
        track.sample_rate = sample_rate.ok_or_else(|| bad(1, "missing `sample_rate=` header"))?;
        Ok(track)
    }
}

/// YIN pitch track with one frame every `cfg.hop` samples.
pub fn estimate_f0(audio: &AudioBuffer, cfg: &ProsodyConfig) -> Result<F0Track> {
    let sr = audio.sample_rate();
    cfg.validate_for(sr)?;
    let x = audio.samples();
    let tau_max = (sr as f64 / cfg.f_min).ceil() as usize;
    let tau_min = ((sr as f64 / cfg.f_max).floor() as usize).max(2);
    if x.len() < 2 * tau_max {
        return Err(Error::AudioTooShort {
            samples: x.len(),
            required: 2 * tau_max,
        });
    }
    // The frame must hold two periods of f_min; shorter clips get one frame.
    let frame_len = cfg.window.max(2 * tau_max + 2).min(x.len());
    let integration = frame_len - tau_max - 1;
    let frames = (x.len() - frame_len) / cfg.hop + 1;

    let mut track = F0Track {
        f0_hz: Vec::with_capacity(frames),
        voiced: Vec::with_capacity(frames),
        periodicity: Vec::with_capacity(frames),
        hop: cfg.hop,
        sample_rate: sr,
    };
    let mut cmnd = vec![0.0; tau_max + 2];
    for f in 0..frames {
        let frame = &x[f * cfg.hop..f * cfg.hop + frame_len];
        cumulative_mean_normalized_difference(frame, integration, &mut cmnd);
        let (f0, aperiodicity) = pick_period(&cmnd, tau_min, tau_max, cfg.threshold)
            .map(|(tau, ap)| (sr as f64 / tau, ap))
            .unwrap_or((0.0, 1.0));
        let voiced = aperiodicity < cfg.threshold && (cfg.f_min..=cfg.f_max).contains(&f0);
        track.f0_hz.push(if voiced { f0 } else { 0.0 });
        track.voiced.push(voiced);
        track.periodicity.push((1.0 - aperiodicity).clamp(0.0, 1.0));
    }
    Ok(track)
}

/// Fills `out[tau]` with d'(tau); `out[0] = 1` and silent lags map to 1.
fn cumulative_mean_normalized_difference(frame: &[f64], integration: usize, out: &mut [f64]) {
    out[0] = 1.0;
    let mut running = 0.0;
    for tau in 1..out.len() {
        let d: f64 = frame[..integration]
            .iter()
            .zip(&frame[tau..tau + integration])
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        running += d;
        out[tau] = if running > 0.0 {
            d * tau as f64 / running
        } else {
            1.0
        };
    }
}

/// Returns the interpolated lag and its aperiodicity.
fn pick_period(cmnd: &[f64], tau_min: usize, tau_max: usize, threshold: f64) -> Option<(f64, f64)> {
    let mut chosen = None;
    let mut tau = tau_min;
    while tau <= tau_max {
        if cmnd[tau] < threshold {
            while tau < tau_max && cmnd[tau + 1] < cmnd[tau] {
                tau += 1;
            }
            chosen = Some(tau);
            break;
        }
        tau += 1;
    }
    let tau = match chosen {
        Some(t) => t,
        // No dip under the threshold: report the global minimum as unvoiced evidence.
        None => (tau_min..=tau_max).min_by(|&a, &b| cmnd[a].total_cmp(&cmnd[b]))?,
    };
    let (refined, value) = if tau > tau_min && tau < tau_max {
        parabolic(cmnd[tau - 1], cmnd[tau], cmnd[tau + 1], tau)
    } else {
        (tau as f64, cmnd[tau])
    };
    Some((refined, value.clamp(0.0, 1.0)))
}

fn parabolic(left: f64, mid: f64, right: f64, tau: usize) -> (f64, f64) {
    let denom = left - 2.0 * mid + right;
    if denom.abs() < f64::EPSILON {
        return (tau as f64, mid);
    }
    let offset = (0.5 * (left - right) / denom).clamp(-0.5, 0.5);
    (tau as f64 + offset, mid - 0.25 * (left - right) * offset)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProsodyStats {
    pub pitch_mean_hz: Option<f64>,
    pub energy_mean: f64,
    pub duration_s: f64,
}

pub fn utterance_prosody(audio: &AudioBuffer, cfg: &ProsodyConfig) -> Result<ProsodyStats> {
    let track = estimate_f0(audio, cfg)?;
    let energy = frame_energy(audio, cfg.window.min(audio.len()), cfg.hop.min(cfg.window.min(audio.len())))?;
    let voiced: Vec<f64> = track
        .f0_hz
        .iter()
        .zip(&track.voiced)
        .filter(|(_, v)| **v)
        .map(|(f, _)| *f)
        .collect();
    let pitch_mean_hz = (!voiced.is_empty()).then(|| voiced.iter().sum::<f64>() / voiced.len() as f64);
    Ok(ProsodyStats {
        pitch_mean_hz,
        energy_mean: energy.iter().sum::<f64>() / energy.len() as f64,
        duration_s: audio.duration_s(),
    })
}

/// Truncates both tracks to the shorter one.
pub fn align_tracks(a: &F0Track, b: &F0Track) -> (F0Track, F0Track) {
    let n = a.len().min(b.len());
    (a.truncated(n), b.truncated(n))
}

fn same_length(a: &F0Track, b: &F0Track) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::FrameCountMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// RMSE of f0 over frames voiced in both tracks.
pub fn rmse_f0(a: &F0Track, b: &F0Track) -> Result<f64> {
    same_length(a, b)?;
    let (sum, n) = (0..a.len())
        .filter(|&i| a.voiced[i] && b.voiced[i])
        .fold((0.0, 0usize), |(s, n), i| {
            let d = a.f0_hz[i] - b.f0_hz[i];
            (s + d * d, n + 1)
        });
    if n == 0 {
        return Err(Error::NoCommonVoicedFrames);
    }
    Ok((sum / n as f64).sqrt())
}

/// RMSE of periodicity over all frames.
pub fn rmse_period(a: &F0Track, b: &F0Track) -> Result<f64> {
    same_length(a, b)?;
    if a.is_empty() {
        return Err(Error::EmptyInput("f0 track"));
    }
    let sum: f64 = a
        .periodicity
        .iter()
        .zip(&b.periodicity)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// F1 of the voiced class, `predicted` against `reference`.
pub fn f1_vuv(predicted: &F0Track, reference: &F0Track) -> Result<f64> {
    same_length(predicted, reference)?;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fneg = 0usize;
    for (&p, &r) in predicted.voiced.iter().zip(&reference.voiced) {
        match (p, r) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    if tp + fneg == 0 {
        return Err(Error::ReferenceUnvoiced);
    }
    Ok(2.0 * tp as f64 / (2 * tp + fp + fneg) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn sine(freq: f64, seconds: f64, sr: u32) -> AudioBuffer {
        let n = (seconds * sr as f64) as usize;
        AudioBuffer::new(
            (0..n).map(|i| 0.8 * (2.0 * PI * freq * i as f64 / sr as f64).sin()).collect(),
            sr,
        )
        .unwrap()
    }

    fn track(f0: &[f64], periodicity: &[f64]) -> F0Track {
        F0Track {
            f0_hz: f0.to_vec(),
            voiced: f0.iter().map(|f| *f > 0.0).collect(),
            periodicity: periodicity.to_vec(),
            hop: 256,
            sample_rate: 22050,
        }
    }

    #[test]
    fn energy_examples() {
        let c = AudioBuffer::new(vec![0.5; 1024], 16000).unwrap();
        assert_eq!(frame_energy(&c, 1024, 256).unwrap(), vec![0.5]);

        let z = AudioBuffer::new(vec![0.0; 4096], 16000).unwrap();
        assert!(frame_energy(&z, 1024, 256).unwrap().iter().all(|e| *e == 0.0));

        // 1024 samples = exactly 16 periods of a 250 Hz tone at 16 kHz.
        let s = AudioBuffer::new(
            (0..1024).map(|i| (2.0 * PI * 250.0 * i as f64 / 16000.0).sin()).collect(),
            16000,
        )
        .unwrap();
        assert_abs_diff_eq!(frame_energy(&s, 1024, 256).unwrap()[0], 0.5f64.sqrt(), epsilon = 1e-2);

        let short = AudioBuffer::new(vec![0.1; 100], 16000).unwrap();
        assert!(matches!(frame_energy(&short, 1024, 256), Err(Error::AudioTooShort { .. })));
        assert!(frame_energy(&c, 128, 256).is_err());
    }

    #[test]
    fn frame_count_formula() {
        for len in [1024usize, 1025, 1279, 1280, 5000, 22050] {
            let a = AudioBuffer::new(vec![0.1; len], 22050).unwrap();
            for (w, h) in [(1024, 256), (1024, 1024), (1024, 1)] {
                assert_eq!(frame_energy(&a, w, h).unwrap().len(), (len - w) / h + 1);
            }
        }
    }

    #[test]
    fn sine_pitch() {
        let t = estimate_f0(&sine(220.0, 1.0, 22050), &ProsodyConfig::default()).unwrap();
        let voiced: Vec<f64> = t.f0_hz.iter().copied().filter(|f| *f > 0.0).collect();
        assert!(voiced.len() as f64 > 0.9 * t.len() as f64);
        let mae = voiced.iter().map(|f| (f - 220.0).abs()).sum::<f64>() / voiced.len() as f64;
        assert!(mae < 2.0, "mae {mae}");
        assert!(t.periodicity.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn sweep_within_two_hz() {
        let cfg = ProsodyConfig::default();
        for sr in [16000u32, 22050, 44100] {
            let mut f = 80.0;
            while f <= 400.0 {
                let t = estimate_f0(&sine(f, 0.5, sr), &cfg).unwrap();
                let worst = t
                    .f0_hz
                    .iter()
                    .zip(&t.voiced)
                    .filter(|(_, v)| **v)
                    .map(|(x, _)| (x - f).abs())
                    .fold(0.0, f64::max);
                assert!(t.voiced.iter().all(|v| *v), "{f} Hz at {sr} not fully voiced");
                assert!(worst < 2.0, "{f} Hz at {sr}: max error {worst}");
                f += 17.0;
            }
        }
    }

    #[test]
    fn silence_is_unvoiced() {
        let a = AudioBuffer::new(vec![0.0; 22050], 22050).unwrap();
        let t = estimate_f0(&a, &ProsodyConfig::default()).unwrap();
        assert!(!t.is_empty());
        assert_eq!(t.voiced_fraction(), 0.0);
        assert!(t.f0_hz.iter().all(|f| *f == 0.0));
    }

    #[test]
    fn white_noise_mostly_unvoiced() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = AudioBuffer::new((0..22050).map(|_| rng.random_range(-0.5..0.5)).collect(), 22050).unwrap();
        let t = estimate_f0(&a, &ProsodyConfig::default()).unwrap();
        assert!(t.voiced_fraction() < 0.2, "voiced fraction {}", t.voiced_fraction());
    }

    #[test]
    fn f0_preconditions() {
        let a = AudioBuffer::new(vec![0.0; 500], 22050).unwrap();
        assert!(matches!(
            estimate_f0(&a, &ProsodyConfig::default()),
            Err(Error::AudioTooShort { required: 882, .. })
        ));
        let low_sr = AudioBuffer::new(vec![0.0; 20000], 4000).unwrap();
        assert!(estimate_f0(&low_sr, &ProsodyConfig::default()).is_err());
        let bad = ProsodyConfig {
            f_max: 700.0,
            ..ProsodyConfig::default()
        };
        assert!(estimate_f0(&sine(220.0, 1.0, 22050), &bad).is_err());
        let t = estimate_f0(&sine(220.0, 1.0, 22050), &ProsodyConfig::default()).unwrap();
        assert_eq!(t, estimate_f0(&sine(220.0, 1.0, 22050), &ProsodyConfig::default()).unwrap());
    }

    #[test]
    fn prosody_stats() {
        let cfg = ProsodyConfig::default();
        let s = utterance_prosody(&sine(220.0, 1.0, 22050), &cfg).unwrap();
        assert!((s.pitch_mean_hz.unwrap() - 220.0).abs() < 2.0);
        assert_eq!(s.duration_s, 1.0);

        let z = utterance_prosody(&AudioBuffer::new(vec![0.0; 44100], 22050).unwrap(), &cfg).unwrap();
        assert_eq!(z.pitch_mean_hz, None);
        assert_eq!(z.energy_mean, 0.0);
        assert_eq!(z.duration_s, 2.0);
    }

    #[test]
    fn track_metric_examples() {
        let a = track(&[100.0, 0.0, 200.0], &[0.9, 0.1, 0.8]);
        assert_eq!(rmse_f0(&a, &a).unwrap(), 0.0);
        assert_eq!(rmse_period(&a, &a).unwrap(), 0.0);
        assert_eq!(f1_vuv(&a, &a).unwrap(), 1.0);

        let one_a = track(&[100.0, 0.0], &[1.0, 0.0]);
        let one_b = track(&[110.0, 0.0], &[1.0, 0.0]);
        assert_eq!(rmse_f0(&one_a, &one_b).unwrap(), 10.0);

        let two_a = track(&[100.0, 200.0], &[1.0, 1.0]);
        let two_b = track(&[110.0, 190.0], &[0.0, 0.0]);
        assert_eq!(rmse_f0(&two_a, &two_b).unwrap(), 10.0);
        assert_eq!(rmse_period(&two_a, &two_b).unwrap(), 1.0);

        let pred = track(&[100.0, 100.0, 0.0], &[1.0; 3]);
        let reference = track(&[100.0, 0.0, 0.0], &[1.0; 3]);
        assert_abs_diff_eq!(f1_vuv(&pred, &reference).unwrap(), 2.0 / 3.0, epsilon = 1e-15);

        let silent = track(&[0.0, 0.0], &[0.0, 0.0]);
        let half = track(&[120.0, 0.0], &[1.0, 0.0]);
        assert_eq!(f1_vuv(&silent, &half).unwrap(), 0.0);
        assert!(matches!(f1_vuv(&half, &silent), Err(Error::ReferenceUnvoiced)));
        assert!(matches!(rmse_f0(&silent, &half), Err(Error::NoCommonVoicedFrames)));
        assert!(matches!(rmse_f0(&a, &half), Err(Error::FrameCountMismatch { .. })));

        let (x, y) = align_tracks(&a, &half);
        assert_eq!((x.len(), y.len()), (2, 2));
        assert_eq!(rmse_f0(&x, &y).unwrap(), 20.0);
    }

    #[test]
    fn periodicity_rmse_matches_formula() {
        let pa = [0.1, 0.7, 0.35, 0.9, 0.0];
        let pb = [0.4, 0.2, 0.35, 1.0, 0.6];
        let a = track(&[0.0; 5], &pa);
        let b = track(&[0.0; 5], &pb);
        let mut s = 0.0;
        for i in 0..5 {
            s += (pa[i] - pb[i]).powi(2);
        }
        assert_abs_diff_eq!(rmse_period(&a, &b).unwrap(), (s / 5.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn track_text_round_trip() {
        let t = estimate_f0(&sine(150.0, 0.3, 16000), &ProsodyConfig::default()).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let back = F0Track::parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, t);
        assert!(F0Track::parse("0 100 1 0.9\n").is_err());
        assert!(F0Track::parse("# hop=256 sample_rate=16000\n0 100 0 0.9\n").is_err());
    }
}
