//! Seeded synthetic data for demos and tests: VAD manifests with Gaussian
//! emotion clusters, and simple test signals.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::VadPoint;
use crate::manifest::{AudioBuffer, DatasetManifest, UtteranceRecord, DEFAULT_NEUTRAL_LABEL};

/// One emotion cluster: mean VAD and isotropic spread.
#[derive(Debug, Clone)]
pub struct ClassSpec {
    pub emotion: String,
    pub center: [f64; 3],
    pub spread: f64,
}

impl ClassSpec {
    pub fn new(emotion: &str, center: [f64; 3], spread: f64) -> Self {
        Self {
            emotion: emotion.to_string(),
            center,
            spread,
        }
    }
}

/// Neutral plus three emotions, loosely shaped like SER output on acted speech.
pub fn default_classes() -> Vec<ClassSpec> {
    vec![
        ClassSpec::new(DEFAULT_NEUTRAL_LABEL, [0.50, 0.42, 0.48], 0.06),
        ClassSpec::new("happy", [0.74, 0.66, 0.58], 0.10),
        ClassSpec::new("angry", [0.32, 0.78, 0.70], 0.10),
        ClassSpec::new("sad", [0.30, 0.28, 0.34], 0.09),
    ]
}

/// `per_class` records for every class, VAD clamped into the unit cube.
pub fn synthetic_manifest(classes: &[ClassSpec], per_class: usize, seed: u64) -> DatasetManifest {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(classes.len() * per_class);
    for class in classes {
        let noise = Normal::new(0.0, class.spread).expect("finite spread");
        for i in 0..per_class {
            let vad = class.center.map(|c| (c + noise.sample(&mut rng)).clamp(0.0, 1.0));
            records.push(UtteranceRecord {
                id: format!("{}_{i:05}", class.emotion),
                speaker: format!("spk{:02}", rng.random_range(0..10)),
                emotion: class.emotion.clone(),
                vad: VadPoint::try_from(vad).expect("clamped into range"),
                audio_path: None,
                emo_embedding: None,
                spk_embedding: None,
            });
        }
    }
    DatasetManifest::new(records, DEFAULT_NEUTRAL_LABEL).expect("generated ids are unique")
}

pub fn sine(freq_hz: f64, seconds: f64, sample_rate: u32, amplitude: f64) -> AudioBuffer {
    let n = (seconds * sample_rate as f64).round() as usize;
    let samples = (0..n)
        .map(|i| amplitude * (2.0 * PI * freq_hz * i as f64 / sample_rate as f64).sin())
        .collect();
    AudioBuffer::new(samples, sample_rate).expect("non-empty signal")
}

pub fn silence(seconds: f64, sample_rate: u32) -> AudioBuffer {
    let n = (seconds * sample_rate as f64).round() as usize;
    AudioBuffer::new(vec![0.0; n], sample_rate).expect("non-empty signal")
}

pub fn white_noise(seconds: f64, sample_rate: u32, amplitude: f64, seed: u64) -> AudioBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (seconds * sample_rate as f64).round() as usize;
    let samples = (0..n).map(|_| rng.random_range(-amplitude..=amplitude)).collect();
    AudioBuffer::new(samples, sample_rate).expect("non-empty signal")
}

/// Concatenates buffers of equal sample rate.
pub fn concat(parts: &[AudioBuffer]) -> AudioBuffer {
    let sr = parts.first().expect("at least one part").sample_rate();
    assert!(parts.iter().all(|p| p.sample_rate() == sr), "sample rates differ");
    let samples = parts.iter().flat_map(|p| p.samples().iter().copied()).collect();
    AudioBuffer::new(samples, sr).expect("non-empty signal")
}
