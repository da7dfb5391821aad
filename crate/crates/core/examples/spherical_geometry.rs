//! Shift VAD points to a neutral center, convert to spherical form and
//! read off the style octant.
//!
//!     cargo run --example spherical_geometry

use easv::geometry::{neutral_center, octant_of, shift, to_cartesian, to_spherical};
use easv::{StyleOctant, VadPoint};

fn main() -> easv::Result<()> {
    let neutrals = [
        VadPoint::new(0.48, 0.40, 0.50)?,
        VadPoint::new(0.52, 0.44, 0.46)?,
        VadPoint::new(0.50, 0.42, 0.48)?,
    ];
    let center = neutral_center(&neutrals)?;
    println!("neutral center {:?}", center.point);

    for p in [
        VadPoint::new(0.80, 0.70, 0.60)?,
        VadPoint::new(0.20, 0.85, 0.75)?,
        VadPoint::new(0.25, 0.20, 0.30)?,
        VadPoint::new(0.50, 0.42, 0.48)?,
    ] {
        let s = shift(p, &center);
        let sv = to_spherical(s);
        let back = to_cartesian(sv);
        println!(
            "{:?} -> r={:.4} theta={:.4} phi={:+.4}  octant {:<18}  round trip error {:.1e}",
            p.to_array(),
            sv.r,
            sv.theta,
            sv.phi,
            octant_of(s).legend(),
            (back.v - s.v).abs().max((back.a - s.a).abs()).max((back.d - s.d).abs()),
        );
    }

    println!("\noctant legend:");
    for o in StyleOctant::ALL {
        println!("  {}", o.legend());
    }
    Ok(())
}
