//! Fit per-emotion centroids and IQR bounds on a synthetic corpus, then
//! turn every utterance into an EASV.
//!
//!     cargo run --release --example fit_and_extract

use std::collections::BTreeMap;

use easv::analysis::easv_octant;
use easv::centroid::SolverConfig;
use easv::pipeline::{extract_all, fit_easv_model, EasvModel};
use easv::synthetic::{default_classes, synthetic_manifest};

fn main() -> easv::Result<()> {
    let manifest = synthetic_manifest(&default_classes(), 200, 7);
    let model = fit_easv_model(&manifest, &SolverConfig::default())?;

    for (emotion, c) in &model.centroids {
        let b = &model.bounds[emotion];
        println!(
            "{emotion:>6}: centroid [{:.3}, {:.3}, {:.3}]  radius fences [{:.3}, {:.3}]",
            c.point[0], c.point[1], c.point[2], b.r_min, b.r_max
        );
    }

    let records = extract_all(&manifest, &model)?;
    let mut per_octant: BTreeMap<(String, String), usize> = BTreeMap::new();
    for r in records.iter().filter(|r| r.emotion != model.neutral_label) {
        *per_octant.entry((r.emotion.clone(), easv_octant(r).to_string())).or_default() += 1;
    }
    println!("\nutterances per (emotion, octant):");
    for ((e, o), n) in per_octant {
        println!("  {e:>6} {o:>4}  {n}");
    }

    let sample = &records[records.len() / 2];
    println!("\nsample {sample:?}");

    // The model survives a JSON round trip unchanged.
    let restored = EasvModel::from_json(&model.to_json()?)?;
    assert_eq!(restored, model);
    Ok(())
}
