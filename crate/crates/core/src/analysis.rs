//! Prosodic variation by emotion style and intensity.
//!
//! Every non-neutral utterance falls into one cell keyed by its emotion,
//! the style octant of its EASV direction, and the intensity region of its
//! normalized radius. Each cell accumulates pitch, energy and duration
//! means; per (emotion, octant) row we also report the spread across
//! regions (`Rc`) and the all-region mean (`AVG`). Neutral utterances are
//! summarized separately since they have no direction.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::pipeline::EasvRecord;
use crate::error::{Error, Result};
use crate::geometry::{octant_of, to_cartesian, SphericalVector, StyleOctant};
use crate::manifest::DatasetManifest;
use crate::prosody::ProsodyStats;

pub const REGION_THRESHOLDS: [f64; 2] = [0.33, 0.66];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IntensityRegion {
    R1,
    R2,
    R3,
}

impl IntensityRegion {
    pub const ALL: [IntensityRegion; 3] = [IntensityRegion::R1, IntensityRegion::R2, IntensityRegion::R3];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for IntensityRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntensityRegion::R1 => "R1",
            IntensityRegion::R2 => "R2",
            IntensityRegion::R3 => "R3",
        })
    }
}

/// `[0, 0.33)`, `[0.33, 0.66)`, `[0.66, 1]`.
pub fn bin_intensity(r_iqr: f64) -> Result<IntensityRegion> {
    if !(0.0..=1.0).contains(&r_iqr) {
        return Err(Error::InvalidArgument(format!("intensity {r_iqr} outside [0, 1]")));
    }
    Ok(if r_iqr < REGION_THRESHOLDS[0] {
        IntensityRegion::R1
    } else if r_iqr < REGION_THRESHOLDS[1] {
        IntensityRegion::R2
    } else {
        IntensityRegion::R3
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    Pitch,
    Energy,
    Duration,
}

impl Feature {
    pub const ALL: [Feature; 3] = [Feature::Pitch, Feature::Energy, Feature::Duration];

    fn value(self, s: &ProsodyStats) -> Option<f64> {
        match self {
            Feature::Pitch => s.pitch_mean_hz,
            Feature::Energy => Some(s.energy_mean),
            Feature::Duration => Some(s.duration_s),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Feature::Pitch => "Pitch",
            Feature::Energy => "Energy",
            Feature::Duration => "Duration",
        }
    }
}

/// Running sum for one feature; pitch may be missing on unvoiced clips.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FeatureSum {
    pub sum: f64,
    pub n: usize,
}

impl FeatureSum {
    fn add(&mut self, v: Option<f64>) {
        if let Some(v) = v {
            self.sum += v;
            self.n += 1;
        }
    }

    fn merge(&mut self, o: &FeatureSum) {
        self.sum += o.sum;
        self.n += o.n;
    }

    pub fn mean(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisCell {
    pub emotion: String,
    pub octant: StyleOctant,
    pub region: IntensityRegion,
    pub count: usize,
    sums: [FeatureSum; 3],
}

impl AnalysisCell {
    fn empty(emotion: &str, octant: StyleOctant, region: IntensityRegion) -> Self {
        Self {
            emotion: emotion.to_string(),
            octant,
            region,
            count: 0,
            sums: [FeatureSum::default(); 3],
        }
    }

    fn add(&mut self, stats: &ProsodyStats) {
        self.count += 1;
        for f in Feature::ALL {
            self.sums[f as usize].add(f.value(stats));
        }
    }

    pub fn mean(&self, f: Feature) -> Option<f64> {
        self.sums[f as usize].mean()
    }

    pub fn pitch_mean(&self) -> Option<f64> {
        self.mean(Feature::Pitch)
    }

    pub fn energy_mean(&self) -> Option<f64> {
        self.mean(Feature::Energy)
    }

    pub fn duration_mean(&self) -> Option<f64> {
        self.mean(Feature::Duration)
    }
}

/// Aggregate over the whole neutral class.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeutralSummary {
    pub count: usize,
    sums: [FeatureSum; 3],
}

impl NeutralSummary {
    pub fn mean(&self, f: Feature) -> Option<f64> {
        self.sums[f as usize].mean()
    }
}

pub type CellKey = (String, StyleOctant, IntensityRegion);
pub type RowKey = (String, StyleOctant, Feature);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnalysisReport {
    pub cells: BTreeMap<CellKey, AnalysisCell>,
    pub rc: BTreeMap<RowKey, f64>,
    pub avg: BTreeMap<RowKey, f64>,
    pub neutral_row: NeutralSummary,
    /// Non-neutral emotions in manifest order.
    pub emotions: Vec<String>,
}

impl AnalysisReport {
    /// Region cells of one (emotion, octant) row, populated or not.
    pub fn row(&self, emotion: &str, octant: StyleOctant) -> [Option<&AnalysisCell>; 3] {
        IntensityRegion::ALL.map(|r| self.cells.get(&(emotion.to_string(), octant, r)))
    }

    pub fn total_count(&self) -> usize {
        self.cells.values().map(|c| c.count).sum()
    }
}

/// Max minus min of the populated region means; needs at least two.
pub fn range_rc(means: &[Option<f64>], counts: &[usize]) -> Option<f64> {
    let populated: Vec<f64> = means
        .iter()
        .zip(counts)
        .filter(|(_, c)| **c > 0)
        .filter_map(|(m, _)| *m)
        .collect();
    if populated.len() < 2 {
        return None;
    }
    let max = populated.iter().copied().fold(f64::MIN, f64::max);
    let min = populated.iter().copied().fold(f64::MAX, f64::min);
    Some(max - min)
}

/// Style octant of a stored EASV direction.
pub fn easv_octant(record: &EasvRecord) -> StyleOctant {
    octant_of(to_cartesian(SphericalVector {
        r: 1.0,
        theta: record.theta,
        phi: record.phi,
    }))
}

pub fn build_report(
    easvs: &[EasvRecord],
    prosody: &HashMap<String, ProsodyStats>,
    manifest: &DatasetManifest,
) -> Result<AnalysisReport> {
    let mut report = AnalysisReport {
        emotions: manifest
            .emotions()
            .into_iter()
            .filter(|e| *e != manifest.neutral_label())
            .map(str::to_string)
            .collect(),
        ..AnalysisReport::default()
    };

    for rec in easvs {
        let utt = manifest
            .get(&rec.id)
            .ok_or_else(|| Error::UnresolvedId(rec.id.clone()))?;
        let stats = prosody
            .get(&rec.id)
            .ok_or_else(|| Error::MissingProsody(rec.id.clone()))?;
        if manifest.is_neutral(utt) {
            report.neutral_row.count += 1;
            for f in Feature::ALL {
                report.neutral_row.sums[f as usize].add(f.value(stats));
            }
            continue;
        }
        let octant = easv_octant(rec);
        let region = bin_intensity(rec.r_iqr)?;
        report
            .cells
            .entry((utt.emotion.clone(), octant, region))
            .or_insert_with(|| AnalysisCell::empty(&utt.emotion, octant, region))
            .add(stats);
    }

    let mut rows: BTreeMap<(String, StyleOctant), [Option<&AnalysisCell>; 3]> = BTreeMap::new();
    for cell in report.cells.values() {
        rows.entry((cell.emotion.clone(), cell.octant)).or_default()[cell.region.index()] = Some(cell);
    }
    let mut rc = BTreeMap::new();
    let mut avg = BTreeMap::new();
    for ((emotion, octant), cells) in &rows {
        let counts = cells.map(|c| c.map_or(0, |c| c.count));
        for f in Feature::ALL {
            let means = cells.map(|c| c.and_then(|c| c.mean(f)));
            if let Some(r) = range_rc(&means, &counts) {
                rc.insert((emotion.clone(), *octant, f), r);
            }
            let mut total = FeatureSum::default();
            for c in cells.iter().flatten() {
                total.merge(&c.sums[f as usize]);
            }
            if let Some(m) = total.mean() {
                avg.insert((emotion.clone(), *octant, f), m);
            }
        }
    }
    report.rc = rc;
    report.avg = avg;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::InvalidArgument(format!("unknown report format `{s}`"))),
        }
    }
}

pub const CSV_HEADER: &str = "emotion,octant,region,count,pitch_mean,energy_mean,duration_mean";

pub fn render_report(report: &AnalysisReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => render_markdown(report),
        ReportFormat::Csv => render_csv(report),
    }
}

/// `1234567` as `1,234,567`.
fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

fn one_decimal(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"))
}

fn raw(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn ordered_emotions(report: &AnalysisReport) -> Vec<&str> {
    let mut out: Vec<&str> = report.emotions.iter().map(String::as_str).collect();
    // Cells whose emotion is missing from the list still get rendered, last.
    for (e, _, _) in report.cells.keys() {
        if !out.contains(&e.as_str()) {
            out.push(e);
        }
    }
    out
}

fn render_markdown(report: &AnalysisReport) -> String {
    let mut s = String::new();
    s.push_str("<!-- angles in radians; intensity regions R1 [0,0.33) R2 [0.33,0.66) R3 [0.66,1] -->\n");
    s.push_str("| Emotion | Style | Num R1 | Num R2 | Num R3 | Num All |");
    for f in Feature::ALL {
        for col in ["R1", "R2", "R3", "Rc", "AVG"] {
            let _ = write!(s, " {} {col} |", f.label());
        }
    }
    s.push('\n');
    s.push_str(&"|---".repeat(6 + 15));
    s.push_str("|\n");

    let nr = &report.neutral_row;
    if nr.count > 0 {
        let _ = write!(s, "| Neutral | All (Average) | - | - | - | {} |", thousands(nr.count));
        for f in Feature::ALL {
            let _ = write!(s, " - | - | - | - | {} |", one_decimal(nr.mean(f)));
        }
        s.push('\n');
    }

    for emotion in ordered_emotions(report) {
        for octant in StyleOctant::ALL {
            let cells = report.row(emotion, octant);
            if cells.iter().all(Option::is_none) {
                continue;
            }
            let counts = cells.map(|c| c.map_or(0, |c| c.count));
            let _ = write!(s, "| {emotion} | {} |", octant.legend());
            for c in counts {
                let _ = write!(s, " {} |", if c > 0 { thousands(c) } else { "-".into() });
            }
            let _ = write!(s, " {} |", thousands(counts.iter().sum()));
            for f in Feature::ALL {
                for c in cells {
                    let _ = write!(s, " {} |", one_decimal(c.and_then(|c| c.mean(f))));
                }
                let key = (emotion.to_string(), octant, f);
                let _ = write!(
                    s,
                    " {} | {} |",
                    one_decimal(report.rc.get(&key).copied()),
                    one_decimal(report.avg.get(&key).copied())
                );
            }
            s.push('\n');
        }
    }
    s
}

fn render_csv(report: &AnalysisReport) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    let nr = &report.neutral_row;
    if nr.count > 0 {
        let _ = writeln!(
            s,
            "neutral,,,{},{},{},{}",
            nr.count,
            raw(nr.mean(Feature::Pitch)),
            raw(nr.mean(Feature::Energy)),
            raw(nr.mean(Feature::Duration))
        );
    }
    for emotion in ordered_emotions(report) {
        for octant in StyleOctant::ALL {
            for cell in report.row(emotion, octant).into_iter().flatten() {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    csv_field(emotion),
                    octant,
                    cell.region,
                    cell.count,
                    raw(cell.pitch_mean()),
                    raw(cell.energy_mean()),
                    raw(cell.duration_mean())
                );
            }
        }
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses the line-delimited prosody file written by the CLI.
pub fn parse_prosody_records(text: &str) -> Result<HashMap<String, ProsodyStats>> {
    #[derive(Deserialize)]
    struct Line {
        id: String,
        #[serde(flatten)]
        stats: ProsodyStats,
    }
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let l: Line = serde_json::from_str(line).map_err(|e| Error::MalformedLine {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if map.insert(l.id.clone(), l.stats).is_some() {
            return Err(Error::DuplicateId(l.id));
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{make_control_vector, ControlSpec};
    use crate::geometry::VadPoint;
    use crate::manifest::UtteranceRecord;

    #[test]
    fn bins() {
        assert_eq!(bin_intensity(0.0).unwrap(), IntensityRegion::R1);
        assert_eq!(bin_intensity(0.3299).unwrap(), IntensityRegion::R1);
        assert_eq!(bin_intensity(0.33).unwrap(), IntensityRegion::R2);
        assert_eq!(bin_intensity(0.66).unwrap(), IntensityRegion::R3);
        assert_eq!(bin_intensity(1.0).unwrap(), IntensityRegion::R3);
        assert!(bin_intensity(1.01).is_err());
        assert!(bin_intensity(-0.1).is_err());
    }

    #[test]
    fn rc_examples() {
        let rc = range_rc(&[Some(66.5), Some(72.9), Some(79.0)], &[611, 2558, 480]).unwrap();
        assert!((rc - 12.5).abs() < 1e-9);
        assert_eq!(range_rc(&[Some(5.0), None, None], &[3, 0, 0]), None);
        assert_eq!(range_rc(&[Some(3.0); 3], &[1, 1, 1]), Some(0.0));
    }

    #[test]
    fn thousands_separator() {
        assert_eq!(thousands(0), "0");
        assert_eq!(thousands(611), "611");
        assert_eq!(thousands(3649), "3,649");
        assert_eq!(thousands(1234567), "1,234,567");
    }

    fn utt(id: &str, emotion: &str) -> UtteranceRecord {
        UtteranceRecord {
            id: id.into(),
            speaker: "s".into(),
            emotion: emotion.into(),
            vad: VadPoint::new(0.5, 0.5, 0.5).unwrap(),
            audio_path: None,
            emo_embedding: None,
            spk_embedding: None,
        }
    }

    fn stats(p: Option<f64>, e: f64, d: f64) -> ProsodyStats {
        ProsodyStats {
            pitch_mean_hz: p,
            energy_mean: e,
            duration_s: d,
        }
    }

    fn easv(id: &str, emotion: &str, octant: StyleOctant, r: f64) -> EasvRecord {
        EasvRecord::new(id, make_control_vector(&ControlSpec::new(emotion, octant, r).unwrap()))
    }

    #[test]
    fn empty_and_single_cell_rendering() {
        let empty = AnalysisReport::default();
        let md = render_report(&empty, ReportFormat::Markdown);
        assert_eq!(md.lines().count(), 3);
        assert_eq!(render_report(&empty, ReportFormat::Csv), format!("{CSV_HEADER}\n"));

        let manifest = DatasetManifest::new(vec![utt("a", "angry")], "neutral").unwrap();
        let easvs = [easv("a", "angry", StyleOctant::III, 0.5)];
        let prosody = HashMap::from([("a".to_string(), stats(Some(120.0), 0.25, 1.5))]);
        let report = build_report(&easvs, &prosody, &manifest).unwrap();
        let csv = render_report(&report, ReportFormat::Csv);
        assert_eq!(csv.lines().nth(1), Some("angry,III,R2,1,120,0.25,1.5"));
        assert_eq!(csv.lines().count(), 2);
        let md = render_report(&report, ReportFormat::Markdown);
        assert_eq!(md.lines().count(), 4);
        assert!(md.contains("| angry | III (-V -A +D) | - | 1 | - | 1 | - | 120.0 | - | - | 120.0 |"));
        assert_eq!(md, render_report(&report, ReportFormat::Markdown));
        assert!(!report.rc.contains_key(&("angry".into(), StyleOctant::III, Feature::Pitch)));
    }

    #[test]
    fn report_groups_and_aggregates() {
        let manifest = DatasetManifest::new(
            vec![
                utt("n1", "neutral"),
                utt("n2", "neutral"),
                utt("a1", "angry"),
                utt("a2", "angry"),
                utt("a3", "angry"),
                utt("h1", "happy"),
            ],
            "neutral",
        )
        .unwrap();
        let easvs = vec![
            EasvRecord::new("n1", crate::pipeline::Easv::neutral("neutral")),
            EasvRecord::new("n2", crate::pipeline::Easv::neutral("neutral")),
            easv("a1", "angry", StyleOctant::I, 0.1),
            easv("a2", "angry", StyleOctant::I, 0.9),
            easv("a3", "angry", StyleOctant::I, 0.95),
            easv("h1", "happy", StyleOctant::VI, 0.5),
        ];
        let prosody: HashMap<_, _> = [
            ("n1", stats(Some(100.0), 1.0, 2.0)),
            ("n2", stats(None, 3.0, 4.0)),
            ("a1", stats(Some(60.0), 5.0, 4.0)),
            ("a2", stats(Some(80.0), 7.0, 3.0)),
            ("a3", stats(Some(90.0), 9.0, 2.0)),
            ("h1", stats(Some(70.0), 2.0, 1.0)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let report = build_report(&easvs, &prosody, &manifest).unwrap();

        assert_eq!(report.neutral_row.count, 2);
        assert_eq!(report.neutral_row.mean(Feature::Pitch), Some(100.0));
        assert_eq!(report.neutral_row.mean(Feature::Energy), Some(2.0));
        assert_eq!(report.total_count(), 4);
        assert_eq!(report.emotions, ["angry", "happy"]);

        let r3 = &report.cells[&("angry".into(), StyleOctant::I, IntensityRegion::R3)];
        assert_eq!(r3.count, 2);
        assert_eq!(r3.pitch_mean(), Some(85.0));
        let key = |f| ("angry".to_string(), StyleOctant::I, f);
        assert_eq!(report.rc[&key(Feature::Pitch)], 25.0);
        assert!((report.avg[&key(Feature::Pitch)] - 230.0 / 3.0).abs() < 1e-12);
        assert_eq!(report.avg[&key(Feature::Energy)], 7.0);

        let mut missing = prosody.clone();
        missing.remove("a2");
        assert!(matches!(
            build_report(&easvs, &missing, &manifest),
            Err(Error::MissingProsody(id)) if id == "a2"
        ));
        let mut stray = easvs.clone();
        stray.push(easv("zz", "angry", StyleOctant::I, 0.5));
        assert!(matches!(
            build_report(&stray, &prosody, &manifest),
            Err(Error::UnresolvedId(_))
        ));
    }

    #[test]
    fn octant_from_angles_covers_all_octants() {
        for o in StyleOctant::ALL {
            let rec = easv("x", "e", o, 0.4);
            assert_eq!(easv_octant(&rec), o);
        }
    }

    #[test]
    fn prosody_lines() {
        let text = "{\"id\":\"a\",\"pitch_mean_hz\":null,\"energy_mean\":0.1,\"duration_s\":1.0}\n";
        let m = parse_prosody_records(text).unwrap();
        assert_eq!(m["a"].pitch_mean_hz, None);
        assert!(parse_prosody_records(&format!("{text}{text}")).is_err());
    }
}
