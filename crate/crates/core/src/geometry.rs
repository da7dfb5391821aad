//! Valence-arousal-dominance cube geometry.
//!
//! Points live in the SER output cube `[0,1]^3`. Shifting a point by a
//! center gives a vector in `[-1,1]^3`, which is then expressed in spherical
//! form: the radius is the (unnormalized) emotion intensity and the two
//! angles are the emotion style.
//!
//! Angle conventions, all radians:
//! - `theta` is the polar angle measured from the +dominance axis, in `[0, pi]`.
//! - `phi` is the azimuth of `(arousal, valence)` measured from the +arousal
//!   axis towards +valence, in `(-pi, pi]`. The two-argument arctangent keeps
//!   antipodal styles (octant I vs VII) apart.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radii below this are treated as the center itself.
pub const DEGENERATE_RADIUS: f64 = 1e-12;

/// A (valence, arousal, dominance) triple in `[0,1]^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct VadPoint {
    v: f64,
    a: f64,
    d: f64,
}

impl VadPoint {
    pub fn new(v: f64, a: f64, d: f64) -> Result<Self> {
        for c in [v, a, d] {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::InvalidVad(c));
            }
        }
        Ok(Self { v, a, d })
    }

    pub fn valence(&self) -> f64 {
        self.v
    }

    pub fn arousal(&self) -> f64 {
        self.a
    }

    pub fn dominance(&self) -> f64 {
        self.d
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.v, self.a, self.d]
    }
}

impl TryFrom<[f64; 3]> for VadPoint {
    type Error = Error;

    fn try_from([v, a, d]: [f64; 3]) -> Result<Self> {
        VadPoint::new(v, a, d)
    }
}

impl From<VadPoint> for [f64; 3] {
    fn from(p: VadPoint) -> Self {
        p.to_array()
    }
}

/// A VAD point expressed relative to a center.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShiftedVad {
    pub v: f64,
    pub a: f64,
    pub d: f64,
}

impl ShiftedVad {
    pub fn new(v: f64, a: f64, d: f64) -> Self {
        Self { v, a, d }
    }

    pub fn norm(&self) -> f64 {
        (self.v * self.v + self.a * self.a + self.d * self.d).sqrt()
    }
}

/// `(r, theta, phi)` with the canonical degenerate form `(0, 0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SphericalVector {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

/// How a [`Centroid`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentroidMode {
    NeutralMean,
    EmotionAdaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub point: [f64; 3],
    pub mode: CentroidMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
}

impl Centroid {
    /// A neutral-mean center at an explicit point.
    pub fn neutral_at(point: [f64; 3]) -> Result<Self> {
        VadPoint::try_from(point)?;
        Ok(Self {
            point,
            mode: CentroidMode::NeutralMean,
            emotion: None,
            objective: None,
        })
    }
}

/// Component-wise mean of the neutral points.
pub fn neutral_center(neutral_points: &[VadPoint]) -> Result<Centroid> {
    if neutral_points.is_empty() {
        return Err(Error::EmptyInput("neutral points"));
    }
    let n = neutral_points.len() as f64;
    let mut sum = [0.0; 3];
    for p in neutral_points {
        for (s, c) in sum.iter_mut().zip(p.to_array()) {
            *s += c;
        }
    }
    Ok(Centroid {
        point: sum.map(|s| (s / n).clamp(0.0, 1.0)),
        mode: CentroidMode::NeutralMean,
        emotion: None,
        objective: None,
    })
}

pub fn shift(p: VadPoint, c: &Centroid) -> ShiftedVad {
    ShiftedVad {
        v: p.v - c.point[0],
        a: p.a - c.point[1],
        d: p.d - c.point[2],
    }
}

pub fn to_spherical(s: ShiftedVad) -> SphericalVector {
    let r = s.norm();
    if !(r >= DEGENERATE_RADIUS) {
        return SphericalVector::default();
    }
    // atan2 form of arccos(d / r); identical in exact arithmetic, better
    // conditioned near the poles.
    let theta = s.v.hypot(s.a).atan2(s.d);
    let phi = if s.v == 0.0 && s.a == 0.0 {
        0.0
    } else {
        canonical_azimuth(s.v.atan2(s.a))
    };
    SphericalVector { r, theta, phi }
}

pub fn to_cartesian(sv: SphericalVector) -> ShiftedVad {
    let (sin_t, cos_t) = sv.theta.sin_cos();
    let (sin_p, cos_p) = sv.phi.sin_cos();
    ShiftedVad {
        v: sv.r * sin_t * sin_p,
        a: sv.r * sin_t * cos_p,
        d: sv.r * cos_t,
    }
}

/// Maps an angle into `(-pi, pi]`, folding `-pi` and `-0.0`.
pub(crate) fn canonical_azimuth(phi: f64) -> f64 {
    let mut p = phi;
    while p <= -PI {
        p += 2.0 * PI;
    }
    while p > PI {
        p -= 2.0 * PI;
    }
    p + 0.0
}

/// One of the eight sign regions of the shifted VAD space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StyleOctant {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
}

impl StyleOctant {
    pub const ALL: [StyleOctant; 8] = [
        StyleOctant::I,
        StyleOctant::II,
        StyleOctant::III,
        StyleOctant::IV,
        StyleOctant::V,
        StyleOctant::VI,
        StyleOctant::VII,
        StyleOctant::VIII,
    ];

    /// `(valence, arousal, dominance)` signs; `true` is positive.
    pub fn signs(self) -> (bool, bool, bool) {
        use StyleOctant::*;
        match self {
            I => (true, true, true),
            II => (false, true, true),
            III => (false, false, true),
            IV => (true, false, true),
            V => (true, true, false),
            VI => (false, true, false),
            VII => (false, false, false),
            VIII => (true, false, false),
        }
    }

    pub fn from_signs(v: bool, a: bool, d: bool) -> Self {
        use StyleOctant::*;
        match (v, a, d) {
            (true, true, true) => I,
            (false, true, true) => II,
            (false, false, true) => III,
            (true, false, true) => IV,
            (true, true, false) => V,
            (false, true, false) => VI,
            (false, false, false) => VII,
            (true, false, false) => VIII,
        }
    }

    pub fn as_str(self) -> &'static str {
        use StyleOctant::*;
        match self {
            I => "I",
            II => "II",
            III => "III",
            IV => "IV",
            V => "V",
            VI => "VI",
            VII => "VII",
            VIII => "VIII",
        }
    }

    /// Table label such as `I (+V +A +D)`.
    pub fn legend(self) -> String {
        let (v, a, d) = self.signs();
        let s = |b: bool| if b { '+' } else { '-' };
        format!("{} ({}V {}A {}D)", self.as_str(), s(v), s(a), s(d))
    }
}

impl fmt::Display for StyleOctant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StyleOctant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        StyleOctant::ALL
            .into_iter()
            .find(|o| o.as_str().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnknownOctant(s.to_string()))
    }
}

/// Sign classification; an exact zero counts as positive.
pub fn octant_of(s: ShiftedVad) -> StyleOctant {
    StyleOctant::from_signs(s.v >= 0.0, s.a >= 0.0, s.d >= 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn vad(v: f64, a: f64, d: f64) -> VadPoint {
        VadPoint::new(v, a, d).unwrap()
    }

    #[test]
    fn neutral_center_means() {
        let c = neutral_center(&[vad(0.0, 0.0, 0.0), vad(1.0, 1.0, 1.0)]).unwrap();
        assert_eq!(c.point, [0.5, 0.5, 0.5]);
        assert_eq!(c.mode, CentroidMode::NeutralMean);

        let c = neutral_center(&[vad(0.2, 0.4, 0.6)]).unwrap();
        assert_eq!(c.point, [0.2, 0.4, 0.6]);

        let c =
            neutral_center(&[vad(0.0, 0.0, 0.0), vad(0.0, 0.0, 0.0), vad(0.3, 0.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(c.point[0], 0.1, epsilon = 1e-15);
        assert_eq!(&c.point[1..], &[0.0, 0.0]);

        assert!(matches!(neutral_center(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn shift_examples() {
        let c = Centroid::neutral_at([0.5, 0.5, 0.5]).unwrap();
        assert_eq!(shift(vad(0.5, 0.5, 0.5), &c), ShiftedVad::default());
        let origin = Centroid::neutral_at([0.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            shift(vad(1.0, 0.0, 1.0), &origin),
            ShiftedVad::new(1.0, 0.0, 1.0)
        );
        let s = shift(vad(0.2, 0.9, 0.4), &c);
        assert_abs_diff_eq!(s.v, -0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(s.a, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(s.d, -0.1, epsilon = 1e-15);
    }

    #[test]
    fn spherical_examples() {
        let sv = to_spherical(ShiftedVad::new(0.3, 0.4, 0.0));
        assert_abs_diff_eq!(sv.r, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(sv.theta, PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sv.phi, 0.3f64.atan2(0.4), epsilon = 1e-15);
        assert_abs_diff_eq!(sv.phi, 0.6435, epsilon = 1e-4);

        let pole = to_spherical(ShiftedVad::new(0.0, 0.0, 0.5));
        assert_eq!((pole.r, pole.theta, pole.phi), (0.5, 0.0, 0.0));

        assert_eq!(
            to_spherical(ShiftedVad::default()),
            SphericalVector::default()
        );
        // Signed zeros must not leak into phi.
        let neg = to_spherical(ShiftedVad::new(-0.0, -0.0, -0.5));
        assert_eq!(neg.phi, 0.0);
        assert!(neg.phi.is_sign_positive());
        assert_abs_diff_eq!(neg.theta, PI, epsilon = 1e-15);
        let back = to_spherical(ShiftedVad::new(-0.0, -0.4, 0.0));
        assert_eq!(back.phi, PI);
    }

    #[test]
    fn cartesian_examples() {
        let s = to_cartesian(SphericalVector {
            r: 0.5,
            theta: PI / 2.0,
            phi: 0.3f64.atan2(0.4),
        });
        assert_abs_diff_eq!(s.v, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(s.a, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(s.d, 0.0, epsilon = 1e-15);

        let s = to_cartesian(SphericalVector {
            r: 1.0,
            theta: 0.0,
            phi: 0.0,
        });
        assert_eq!(s, ShiftedVad::new(0.0, 0.0, 1.0));
        assert_eq!(
            to_cartesian(SphericalVector::default()),
            ShiftedVad::default()
        );
    }

    #[test]
    fn octant_table() {
        assert_eq!(octant_of(ShiftedVad::new(0.1, 0.1, 0.1)), StyleOctant::I);
        assert_eq!(
            octant_of(ShiftedVad::new(-0.1, -0.1, -0.1)),
            StyleOctant::VII
        );
        assert_eq!(octant_of(ShiftedVad::new(0.0, 0.2, -0.3)), StyleOctant::V);
        for o in StyleOctant::ALL {
            let (v, a, d) = o.signs();
            assert_eq!(StyleOctant::from_signs(v, a, d), o);
            assert_eq!(o.as_str().parse::<StyleOctant>().unwrap(), o);
        }
        assert_eq!(StyleOctant::III.legend(), "III (-V -A +D)");
        assert!("IX".parse::<StyleOctant>().is_err());
    }

    #[test]
    fn vad_range_enforced() {
        assert!(VadPoint::new(1.2, 0.0, 0.0).is_err());
        assert!(VadPoint::new(0.0, -0.01, 0.0).is_err());
        assert!(VadPoint::new(f64::NAN, 0.0, 0.0).is_err());
    }

    fn phi_close(a: f64, b: f64, tol: f64) -> bool {
        let d = (a - b).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d) <= tol
    }

    proptest! {
        #[test]
        fn round_trip(r in 1e-6f64..2.0, theta in 0.0f64..=PI, phi in -PI..=PI) {
            let phi = if phi == -PI { PI } else { phi };
            let sv = SphericalVector { r, theta, phi };
            let back = to_spherical(to_cartesian(sv));
            prop_assert!((back.r - r).abs() <= 1e-9);
            prop_assert!((back.theta - theta).abs() <= 1e-9);
            // phi is meaningless on the poles.
            if theta.sin() > 1e-6 {
                prop_assert!(phi_close(back.phi, phi, 1e-9));
            }
        }

        #[test]
        fn norm_preserved(v in -1.0f64..1.0, a in -1.0f64..1.0, d in -1.0f64..1.0) {
            let s = ShiftedVad::new(v, a, d);
            let sv = to_spherical(s);
            if s.norm() >= DEGENERATE_RADIUS {
                prop_assert!((sv.r - s.norm()).abs() <= 1e-12);
            }
            prop_assert!((0.0..=PI).contains(&sv.theta));
            prop_assert!(sv.phi > -PI && sv.phi <= PI);
        }

        #[test]
        fn octant_survives_round_trip(v in -1.0f64..1.0, a in -1.0f64..1.0, d in -1.0f64..1.0) {
            prop_assume!(v != 0.0 && a != 0.0 && d != 0.0);
            let s = ShiftedVad::new(v, a, d);
            prop_assert_eq!(octant_of(s), octant_of(to_cartesian(to_spherical(s))));
        }

        #[test]
        fn self_shift_is_zero(v in 0.0f64..=1.0, a in 0.0f64..=1.0, d in 0.0f64..=1.0) {
            let p = VadPoint::new(v, a, d).unwrap();
            let c = neutral_center(&[p]).unwrap();
            prop_assert_eq!(shift(p, &c), ShiftedVad::default());
        }
    }
}
