//! Build run-time control vectors for each style octant at the three
//! named intensity levels.
//!
//!     cargo run --example control_vectors

use easv::pipeline::{make_control_vector, ControlSpec, IntensityLabel};
use easv::StyleOctant;

fn main() -> easv::Result<()> {
    for octant in StyleOctant::ALL {
        for label in [IntensityLabel::Weak, IntensityLabel::Medium, IntensityLabel::Strong] {
            let cv = make_control_vector(&ControlSpec::new("happy", octant, label.value())?);
            println!(
                "{:<18} {label:?}: r_iqr={:.1} theta={:.4} phi={:+.4}",
                octant.legend(),
                cv.r_iqr,
                cv.theta,
                cv.phi
            );
        }
    }
    Ok(())
}
