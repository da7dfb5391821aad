//! Compare the emotion-adaptive centroid found by the multi-start simplex
//! solver with an exhaustive lattice search.
//!
//!     cargo run --release --example centroid_search

use std::time::Instant;

use easv::centroid::{grid_search_centroid, objective, solve_centroid, SolverConfig};
use easv::synthetic::{default_classes, synthetic_manifest};

fn main() -> easv::Result<()> {
    let manifest = synthetic_manifest(&default_classes(), 150, 42);
    let neutrals = manifest.neutral_points();
    let cfg = SolverConfig::default();

    for emotion in ["happy", "angry", "sad"] {
        let targets = manifest.vad_of_class(emotion);
        let t = Instant::now();
        let solved = solve_centroid(&targets, &neutrals, &cfg)?;
        let solve_ms = t.elapsed().as_secs_f64() * 1e3;
        let t = Instant::now();
        let grid = grid_search_centroid(&targets, &neutrals, 0.02, cfg.denominator_epsilon)?;
        let grid_ms = t.elapsed().as_secs_f64() * 1e3;
        let at_neutral = objective(
            easv::geometry::neutral_center(&neutrals)?.point,
            &targets,
            &neutrals,
            cfg.denominator_epsilon,
        )?;
        println!("{emotion}:");
        println!("  objective at neutral mean  {at_neutral:.4}");
        println!(
            "  solver  {:.4} at [{:.3}, {:.3}, {:.3}]  ({solve_ms:.1} ms)",
            solved.objective.unwrap(),
            solved.point[0],
            solved.point[1],
            solved.point[2]
        );
        println!(
            "  grid    {:.4} at [{:.3}, {:.3}, {:.3}]  ({grid_ms:.1} ms)",
            grid.objective.unwrap(),
            grid.point[0],
            grid.point[1],
            grid.point[2]
        );
    }
    Ok(())
}
