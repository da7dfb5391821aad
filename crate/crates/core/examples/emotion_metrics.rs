//! Objective emotion metrics on toy inputs: SVAS, EECS, ECA, the
//! orthogonality loss and intensity-pair ordering accuracy.
//!
//!     cargo run --example emotion_metrics

use easv::geometry::neutral_center;
use easv::metrics::{eca, eecs, orthogonality_loss, pair_order_accuracy, svas, EmbeddingBatch, IntensityPair};
use easv::pipeline::IntensityLabel;
use easv::VadPoint;

fn main() -> easv::Result<()> {
    let center = neutral_center(&[VadPoint::new(0.5, 0.45, 0.5)?, VadPoint::new(0.5, 0.41, 0.46)?])?;
    let reference = VadPoint::new(0.78, 0.70, 0.62)?;
    for synth in [
        VadPoint::new(0.78, 0.70, 0.62)?,
        VadPoint::new(0.70, 0.60, 0.55)?,
        VadPoint::new(0.30, 0.75, 0.70)?,
    ] {
        println!("SVAS {:?} vs reference: {:.4}", synth.to_array(), svas(synth, reference, &center)?);
    }

    println!("EECS: {:.4}", eecs(&[0.2, 0.9, -0.1, 0.4], &[0.25, 0.8, 0.0, 0.35])?);
    println!("ECA:  {:.4}", eca(&["happy", "sad", "angry", "sad"], &["happy", "sad", "sad", "sad"])?);

    let speaker = EmbeddingBatch::new(vec![vec![1.0, 0.1, 0.0], vec![0.9, -0.2, 0.1]])?;
    let leaky = EmbeddingBatch::new(vec![vec![0.7, 0.7, 0.0], vec![0.5, 0.0, 0.8]])?;
    let clean = EmbeddingBatch::new(vec![vec![0.0, 0.0, 1.0], vec![-0.1, 0.0, 0.9]])?;
    println!("orthogonality loss, leaky: {:.4}", orthogonality_loss(&speaker, &leaky)?);
    println!("orthogonality loss, clean: {:.4}", orthogonality_loss(&speaker, &clean)?);

    let (w, m, s) = (IntensityLabel::Weak.value(), IntensityLabel::Medium.value(), IntensityLabel::Strong.value());
    let judged = |r_low, r_high, judged_high_is_second| IntensityPair { r_low, r_high, judged_high_is_second };
    let pairs = [judged(w, m, true), judged(m, s, true), judged(w, s, true), judged(m, s, false)];
    println!("pair ordering accuracy: {:.2}", pair_order_accuracy(&pairs)?);
    Ok(())
}
