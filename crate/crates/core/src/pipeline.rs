//! Emotion-adaptive spherical vectors (EASV).
//!
//! Fitting a model runs, for every non-neutral class: centroid search,
//! shift, spherical transform, then per-class interquartile bounds on the
//! radius. Extraction applies the stored centroid and bounds to a single
//! record. Neutral utterances always map to `(0, 0, 0)`.

use std::collections::BTreeMap;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centroid::{solve_centroid, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::{shift, to_spherical, Centroid, ShiftedVad, SphericalVector, StyleOctant};
use crate::manifest::{DatasetManifest, UtteranceRecord};

/// Fewer records than this make quartiles meaningless.
pub const MIN_CLASS_RECORDS: usize = 4;

/// Quartiles of the radius and the Tukey fences built from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqrBounds {
    pub q1: f64,
    pub q3: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl IqrBounds {
    pub fn is_degenerate(&self) -> bool {
        !(self.r_min < self.r_max)
    }
}

/// Quantile by linear interpolation between closest ranks of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn iqr_bounds(radii: &[f64]) -> Result<IqrBounds> {
    if radii.is_empty() {
        return Err(Error::EmptyInput("radii"));
    }
    if radii.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidArgument("non-finite radius".into()));
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    Ok(IqrBounds {
        q1,
        q3,
        r_min: q1 - 1.5 * iqr,
        r_max: q3 + 1.5 * iqr,
    })
}

/// Clamps `r` to the fences and maps it affinely onto `[0, 1]`.
pub fn normalize_radius(r: f64, b: &IqrBounds) -> Result<f64> {
    if b.is_degenerate() {
        return Err(Error::InvalidArgument(format!(
            "degenerate bounds r_min={} r_max={}",
            b.r_min, b.r_max
        )));
    }
    let clamped = r.clamp(b.r_min, b.r_max);
    Ok(((clamped - b.r_min) / (b.r_max - b.r_min)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Easv {
    pub r_iqr: f64,
    pub theta: f64,
    pub phi: f64,
    pub emotion: String,
}

impl Easv {
    pub fn neutral(emotion: impl Into<String>) -> Self {
        Self {
            r_iqr: 0.0,
            theta: 0.0,
            phi: 0.0,
            emotion: emotion.into(),
        }
    }

    pub fn angles(&self) -> (f64, f64) {
        (self.theta, self.phi)
    }
}

/// An [`Easv`] bound to its utterance id; one line of an EASV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EasvRecord {
    pub id: String,
    pub emotion: String,
    pub r_iqr: f64,
    pub theta: f64,
    pub phi: f64,
}

impl EasvRecord {
    pub fn new(id: impl Into<String>, easv: Easv) -> Self {
        Self {
            id: id.into(),
            emotion: easv.emotion,
            r_iqr: easv.r_iqr,
            theta: easv.theta,
            phi: easv.phi,
        }
    }

    pub fn easv(&self) -> Easv {
        Easv {
            r_iqr: self.r_iqr,
            theta: self.theta,
            phi: self.phi,
            emotion: self.emotion.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EasvModel {
    pub centroids: BTreeMap<String, Centroid>,
    pub bounds: BTreeMap<String, IqrBounds>,
    pub neutral_label: String,
    pub solver: SolverConfig,
}

/// On-disk form of an [`EasvModel`].
#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    tool_version: String,
    neutral_label: String,
    solver: SolverConfig,
    centroids: BTreeMap<String, Centroid>,
    bounds: BTreeMap<String, IqrBounds>,
}

impl EasvModel {
    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            neutral_label: self.neutral_label.clone(),
            solver: self.solver.clone(),
            centroids: self.centroids.clone(),
            bounds: self.bounds.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::parse("model", e))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::parse("model", e))?;
        let model = Self {
            centroids: doc.centroids,
            bounds: doc.bounds,
            neutral_label: doc.neutral_label,
            solver: doc.solver,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::parse("model", msg));
        if self.centroids.contains_key(&self.neutral_label) || self.bounds.contains_key(&self.neutral_label) {
            return bad("neutral class must not carry a centroid or bounds".into());
        }
        if !self.centroids.keys().eq(self.bounds.keys()) {
            return bad("centroid and bounds classes differ".into());
        }
        for (k, b) in &self.bounds {
            if b.is_degenerate() {
                return Err(Error::DegenerateBounds(k.clone()));
            }
        }
        Ok(())
    }

    pub fn spherical_of(&self, record: &UtteranceRecord) -> Result<SphericalVector> {
        let c = self
            .centroids
            .get(&record.emotion)
            .ok_or_else(|| Error::UnknownEmotion(record.emotion.clone()))?;
        Ok(to_spherical(shift(record.vad, c)))
    }
}

pub fn fit_easv_model(manifest: &DatasetManifest, cfg: &SolverConfig) -> Result<EasvModel> {
    cfg.validate()?;
    let neutral_label = manifest.neutral_label().to_string();
    let neutrals = manifest.neutral_points();
    if neutrals.is_empty() {
        return Err(Error::NoNeutralRecords(neutral_label));
    }

    let classes: Vec<&str> = {
        let mut c: Vec<&str> = manifest
            .emotions()
            .into_iter()
            .filter(|e| *e != neutral_label)
            .collect();
        c.sort_unstable();
        c
    };
    let per_class: Vec<(&str, Vec<_>)> = classes
        .iter()
        .map(|&k| (k, manifest.vad_of_class(k)))
        .collect();
    for (k, pts) in &per_class {
        if pts.len() < MIN_CLASS_RECORDS {
            return Err(Error::TooFewRecords {
                emotion: k.to_string(),
                count: pts.len(),
                required: MIN_CLASS_RECORDS,
            });
        }
    }

    let fitted: Vec<(String, Centroid, IqrBounds)> = per_class
        .par_iter()
        .map(|(k, targets)| {
            let mut centroid = solve_centroid(targets, &neutrals, cfg)?;
            centroid.emotion = Some(k.to_string());
            let radii: Vec<f64> = targets
                .iter()
                .map(|p| to_spherical(shift(*p, &centroid)).r)
                .collect();
            let bounds = iqr_bounds(&radii)?;
            if bounds.is_degenerate() {
                return Err(Error::DegenerateBounds(k.to_string()));
            }
            log::info!(
                "class {k}: centroid {:?}, r in [{:.4}, {:.4}]",
                centroid.point,
                bounds.r_min,
                bounds.r_max
            );
            Ok((k.to_string(), centroid, bounds))
        })
        .collect::<Result<_>>()?;

    let mut model = EasvModel {
        centroids: BTreeMap::new(),
        bounds: BTreeMap::new(),
        neutral_label,
        solver: cfg.clone(),
    };
    for (k, c, b) in fitted {
        model.centroids.insert(k.clone(), c);
        model.bounds.insert(k, b);
    }
    Ok(model)
}

pub fn extract_easv(record: &UtteranceRecord, model: &EasvModel) -> Result<Easv> {
    if record.emotion == model.neutral_label {
        return Ok(Easv::neutral(record.emotion.clone()));
    }
    let bounds = model
        .bounds
        .get(&record.emotion)
        .ok_or_else(|| Error::UnknownEmotion(record.emotion.clone()))?;
    let sv = model.spherical_of(record)?;
    Ok(Easv {
        r_iqr: normalize_radius(sv.r, bounds)?,
        theta: sv.theta,
        phi: sv.phi,
        emotion: record.emotion.clone(),
    })
}

/// Extracts every record of the manifest, in manifest order.
pub fn extract_all(manifest: &DatasetManifest, model: &EasvModel) -> Result<Vec<EasvRecord>> {
    manifest
        .records()
        .par_iter()
        .map(|r| extract_easv(r, model).map(|e| EasvRecord::new(r.id.clone(), e)))
        .collect()
}

pub fn write_easv_records(records: &[EasvRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).map_err(|e| Error::parse("easv", e))?);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_easv_records(text: &str) -> Result<Vec<EasvRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::MalformedLine {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Named intensity levels used for run-time control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntensityLabel {
    Weak,
    Medium,
    Strong,
}

impl IntensityLabel {
    pub fn value(self) -> f64 {
        match self {
            IntensityLabel::Weak => 0.1,
            IntensityLabel::Medium => 0.5,
            IntensityLabel::Strong => 0.9,
        }
    }
}

impl FromStr for IntensityLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "weak" => Ok(IntensityLabel::Weak),
            "medium" => Ok(IntensityLabel::Medium),
            "strong" => Ok(IntensityLabel::Strong),
            _ => Err(Error::UnknownIntensityLabel(s.to_string())),
        }
    }
}

pub fn intensity_label_to_value(label: &str) -> Result<f64> {
    label.parse::<IntensityLabel>().map(IntensityLabel::value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlSpec {
    pub emotion: String,
    pub octant: StyleOctant,
    pub intensity: f64,
}

impl ControlSpec {
    pub fn new(emotion: impl Into<String>, octant: StyleOctant, intensity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&intensity) {
            return Err(Error::InvalidArgument(format!(
                "intensity {intensity} outside [0, 1]"
            )));
        }
        Ok(Self {
            emotion: emotion.into(),
            octant,
            intensity,
        })
    }
}

/// Points the vector along the octant's cube diagonal with length `intensity`.
pub fn make_control_vector(spec: &ControlSpec) -> Easv {
    let (v, a, d) = spec.octant.signs();
    let unit = 1.0 / 3f64.sqrt();
    let comp = |pos: bool| if pos { unit } else { -unit };
    let dir = to_spherical(ShiftedVad::new(comp(v), comp(a), comp(d)));
    Easv {
        r_iqr: spec.intensity,
        theta: dir.theta,
        phi: dir.phi,
        emotion: spec.emotion.clone(),
    }
}
