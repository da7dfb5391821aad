//! Objective emotion metrics: SVAS, EECS, ECA, the normalized orthogonality
//! loss between speaker and emotion embeddings, and pairwise intensity
//! ordering accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{shift, to_spherical, Centroid, CentroidMode, VadPoint};

/// Shifted radii below this leave the angle undefined.
pub const MIN_SVAS_RADIUS: f64 = 1e-9;

/// Style angles of a spherical emotion vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleVector {
    pub theta: f64,
    pub phi: f64,
}

fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Style angles of `p` about a fixed center.
pub fn angle_vector(p: VadPoint, center: &Centroid) -> Result<AngleVector> {
    let sv = to_spherical(shift(p, center));
    if sv.r < MIN_SVAS_RADIUS {
        return Err(Error::DegenerateRadius);
    }
    Ok(AngleVector {
        theta: sv.theta,
        phi: sv.phi,
    })
}

/// Cosine similarity of two `(theta, phi)` angle vectors.
pub fn angle_similarity(a: AngleVector, b: AngleVector) -> Result<f64> {
    cosine(&[a.theta, a.phi], &[b.theta, b.phi])
}

/// Spherical vector angle similarity about the neutral-mean center.
pub fn svas(synth_vad: VadPoint, ref_vad: VadPoint, neutral_center: &Centroid) -> Result<f64> {
    if neutral_center.mode != CentroidMode::NeutralMean {
        return Err(Error::InvalidArgument(
            "SVAS requires the fixed neutral-mean center".into(),
        ));
    }
    angle_similarity(
        angle_vector(synth_vad, neutral_center)?,
        angle_vector(ref_vad, neutral_center)?,
    )
}

/// Emotion embedding cosine similarity.
pub fn eecs(a: &[f64], b: &[f64]) -> Result<f64> {
    cosine(a, b)
}

fn fold_label(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Emotion classification accuracy; labels compare after trim and case-fold.
pub fn eca<S: AsRef<str>>(predicted: &[S], reference: &[S]) -> Result<f64> {
    if predicted.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            left: predicted.len(),
            right: reference.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyInput("labels"));
    }
    let hits = predicted
        .iter()
        .zip(reference)
        .filter(|(p, r)| fold_label(p.as_ref()) == fold_label(r.as_ref()))
        .count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// `n` row vectors of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingBatch {
    rows: Vec<Vec<f64>>,
    dim: usize,
}

impl EmbeddingBatch {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().ok_or(Error::EmptyInput("embedding batch"))?.len();
        if dim == 0 {
            return Err(Error::EmptyInput("embedding row"));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad.len(),
            });
        }
        Ok(Self { rows, dim })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Sum over all `(i, j)` of `(s_i . e_j)^2 / (|s_i|^2 |e_j|^2)`.
pub fn orthogonality_loss(speaker: &EmbeddingBatch, emotion: &EmbeddingBatch) -> Result<f64> {
    if speaker.n() != emotion.n() {
        return Err(Error::DimensionMismatch {
            left: speaker.n(),
            right: emotion.n(),
        });
    }
    if speaker.dim() != emotion.dim() {
        return Err(Error::DimensionMismatch {
            left: speaker.dim(),
            right: emotion.dim(),
        });
    }
    let sq_norms = |b: &EmbeddingBatch| -> Result<Vec<f64>> {
        b.rows()
            .iter()
            .map(|r| {
                let n: f64 = r.iter().map(|x| x * x).sum();
                if n > 0.0 {
                    Ok(n)
                } else {
                    Err(Error::ZeroNorm)
                }
            })
            .collect()
    };
    let s_norms = sq_norms(speaker)?;
    let e_norms = sq_norms(emotion)?;

    let mut total = 0.0;
    for (e, en) in emotion.rows().iter().zip(&e_norms) {
        for (s, sn) in speaker.rows().iter().zip(&s_norms) {
            let dot: f64 = s.iter().zip(e).map(|(x, y)| x * y).sum();
            total += dot * dot / (sn * en);
        }
    }
    Ok(total)
}

/// One listening-test judgment between two intensity levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityPair {
    pub r_low: f64,
    pub r_high: f64,
    /// The listener picked the second sample as the stronger one.
    pub judged_high_is_second: bool,
}

/// Fraction of pairs whose judgment agrees with the sign of `r_high - r_low`.
/// Equal intensities always count as wrong.
pub fn pair_order_accuracy(pairs: &[IntensityPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("intensity pairs"));
    }
    let correct = pairs
        .iter()
        .filter(|p| {
            (p.r_high > p.r_low && p.judged_high_is_second)
                || (p.r_high < p.r_low && !p.judged_high_is_second)
        })
        .count();
    Ok(correct as f64 / pairs.len() as f64)
}
