//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for input or validation errors (including
//! bad arguments), 2 for internal failures. Outputs are assembled in memory
//! and written at the end through a temporary file and rename, so a failing
//! command leaves no output behind.

use std::collections::{BTreeMap, HashMap};
use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{build_report, parse_prosody_records, render_report, ReportFormat};
use crate::centroid::SolverConfig;
use crate::error::{Error, Result};
use crate::geometry::{neutral_center, Centroid, StyleOctant, VadPoint};
use crate::manifest::{load_manifest, read_wav, DEFAULT_NEUTRAL_LABEL};
use crate::metrics::{eca, eecs, orthogonality_loss, pair_order_accuracy, svas, EmbeddingBatch, IntensityPair};
use crate::pipeline::{
    extract_all, fit_easv_model, intensity_label_to_value, make_control_vector, parse_easv_records,
    write_easv_records, ControlSpec, EasvModel, EasvRecord,
};
use crate::prosody::{align_tracks, f1_vuv, rmse_f0, rmse_period, utterance_prosody, F0Track, ProsodyConfig};

/// Environment variable read by the binary for log verbosity.
pub const LOG_ENV: &str = "EASV_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "easv",
    version,
    about = "Emotion-adaptive spherical vectors, prosody analysis and emotion metrics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for per-utterance work (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit per-emotion centroids and radius bounds from a VAD manifest.
    Fit(FitArgs),
    /// Convert every manifest record to an EASV using a fitted model.
    Extract(ExtractArgs),
    /// Build a run-time control vector from an emotion, style octant and intensity.
    ControlVec(ControlVecArgs),
    /// Spherical vector angle similarity between synthesized and reference VAD.
    Svas(SvasArgs),
    /// EECS, ECA, orthogonality loss and pitch-track errors from files.
    Metrics(MetricsArgs),
    /// Pitch, energy and duration per utterance from WAV files.
    Prosody(ProsodyArgs),
    /// Prosodic variation report by emotion, style octant and intensity region.
    Analyze(AnalyzeArgs),
    /// Ordering accuracy of pairwise intensity judgments.
    PairAcc(PairAccArgs),
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Simplex iterations per start.
    #[arg(long, default_value_t = SolverConfig::default().max_iterations)]
    pub max_iterations: usize,
    /// Seed for the random multi-starts.
    #[arg(long, default_value_t = SolverConfig::default().seed)]
    pub seed: u64,
    /// Random starts on top of the fixed ones.
    #[arg(long, default_value_t = SolverConfig::default().random_starts)]
    pub random_starts: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iterations,
            seed: self.seed,
            random_starts: self.random_starts,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Line-delimited manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Label of the neutral class.
    #[arg(long, default_value = DEFAULT_NEUTRAL_LABEL)]
    pub neutral_label: String,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Model written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    /// EASV file to write (one JSON object per line).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ControlVecArgs {
    #[arg(long)]
    pub emotion: String,
    /// Style octant, I..VIII.
    #[arg(long)]
    pub octant: String,
    /// Number in [0, 1] or one of weak, medium, strong.
    #[arg(long)]
    pub intensity: String,
    /// Optional file to write; the vector is always printed.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SvasArgs {
    /// VAD file for synthesized speech: lines of {"id":..,"vad":[v,a,d]}.
    #[arg(long)]
    pub synth: PathBuf,
    /// VAD file for reference speech, same ids.
    #[arg(long)]
    pub reference: PathBuf,
    /// Manifest whose neutral records define the center.
    #[arg(long, conflicts_with = "center", required_unless_present = "center")]
    pub neutral_manifest: Option<PathBuf>,
    /// Explicit center as v,a,d.
    #[arg(long)]
    pub center: Option<String>,
    #[arg(long, default_value = DEFAULT_NEUTRAL_LABEL)]
    pub neutral_label: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Emotion embeddings of synthesized speech, one space-separated vector per line.
    #[arg(long, requires = "emb_ref")]
    pub emb_synth: Option<PathBuf>,
    /// Emotion embeddings of reference speech, row-aligned with --emb-synth.
    #[arg(long, requires = "emb_synth")]
    pub emb_ref: Option<PathBuf>,
    /// Predicted emotion labels, one per line.
    #[arg(long, requires = "ref_labels")]
    pub pred_labels: Option<PathBuf>,
    #[arg(long, requires = "pred_labels")]
    pub ref_labels: Option<PathBuf>,
    /// Speaker embedding batch for the orthogonality loss.
    #[arg(long, requires = "emo_emb")]
    pub spk_emb: Option<PathBuf>,
    #[arg(long, requires = "spk_emb")]
    pub emo_emb: Option<PathBuf>,
    /// Predicted pitch track.
    #[arg(long, requires = "track_ref")]
    pub track: Option<PathBuf>,
    /// Reference pitch track.
    #[arg(long, requires = "track")]
    pub track_ref: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProsodyArgs {
    /// Lines of `id path`.
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    pub list: Option<PathBuf>,
    /// Manifest whose `audio_path` entries are used (relative to the manifest).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Directory to write per-utterance pitch tracks into.
    #[arg(long)]
    pub tracks_dir: Option<PathBuf>,
    #[arg(long, default_value_t = ProsodyConfig::default().window)]
    pub window: usize,
    #[arg(long, default_value_t = ProsodyConfig::default().hop)]
    pub hop: usize,
    #[arg(long, default_value_t = ProsodyConfig::default().f_min)]
    pub f_min: f64,
    #[arg(long, default_value_t = ProsodyConfig::default().f_max)]
    pub f_max: f64,
    /// Aperiodicity threshold for the voiced decision.
    #[arg(long, default_value_t = ProsodyConfig::default().threshold)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// EASV file written by `extract`.
    #[arg(long)]
    pub easv: PathBuf,
    /// Prosody file written by `prosody`.
    #[arg(long)]
    pub prosody: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = DEFAULT_NEUTRAL_LABEL)]
    pub neutral_label: String,
    /// Report file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// markdown or csv.
    #[arg(long, default_value = "markdown")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct PairAccArgs {
    /// Lines of `r_low r_high judged_high_is_second` (judgment as 1/0 or true/false).
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            // First paragraph only, folded onto one line.
            let msg = e.to_string();
            let head: Vec<&str> = msg.lines().take_while(|l| !l.trim().is_empty()).map(str::trim).collect();
            eprintln!("{}", head.join(" "));
            return 1;
        }
    };
    let outcome = std::panic::catch_unwind(|| execute(&cli));
    match outcome {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(_) => {
            eprintln!("internal error");
            2
        }
    }
}

/// Files to publish once the command has succeeded.
#[derive(Default)]
struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
    stdout: String,
}

impl Outputs {
    fn file(&mut self, path: &Path, bytes: impl Into<Vec<u8>>) {
        self.files.push((path.to_path_buf(), bytes.into()));
    }

    fn publish(self) -> Result<()> {
        let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
        let cleanup = |staged: &[(PathBuf, PathBuf)]| {
            for (tmp, _) in staged {
                let _ = fs::remove_file(tmp);
            }
        };
        for (path, bytes) in &self.files {
            let tmp = temp_sibling(path);
            if let Err(e) = fs::write(&tmp, bytes) {
                cleanup(&staged);
                let _ = fs::remove_file(&tmp);
                return Err(Error::io(path, e));
            }
            staged.push((tmp, path.clone()));
        }
        for (i, (tmp, path)) in staged.iter().enumerate() {
            if let Err(e) = fs::rename(tmp, path) {
                cleanup(&staged[i..]);
                return Err(Error::io(path, e));
            }
        }
        print!("{}", self.stdout);
        let _ = std::io::stdout().flush();
        Ok(())
    }
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp-{}", std::process::id()))
}

fn execute(cli: &Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if cli.jobs > 0 {
        pool = pool.num_threads(cli.jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let outputs = pool.install(|| match &cli.command {
        Command::Fit(a) => fit(a),
        Command::Extract(a) => extract(a),
        Command::ControlVec(a) => control_vec(a),
        Command::Svas(a) => svas_cmd(a),
        Command::Metrics(a) => metrics_cmd(a),
        Command::Prosody(a) => prosody_cmd(a),
        Command::Analyze(a) => analyze(a),
        Command::PairAcc(a) => pair_acc(a),
    })?;
    outputs.publish()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn fit(a: &FitArgs) -> Result<Outputs> {
    let manifest = load_manifest(&a.manifest, &a.neutral_label)?;
    let model = fit_easv_model(&manifest, &a.solver.config())?;
    let mut out = Outputs::default();
    out.file(&a.out, model.to_json()?);
    Ok(out)
}

fn extract(a: &ExtractArgs) -> Result<Outputs> {
    let model = EasvModel::from_json(&read_text(&a.model)?)?;
    let manifest = load_manifest(&a.manifest, &model.neutral_label)?;
    let records = extract_all(&manifest, &model)?;
    let mut out = Outputs::default();
    out.file(&a.out, write_easv_records(&records)?);
    Ok(out)
}

fn parse_intensity(s: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) => Ok(v),
        Err(_) => intensity_label_to_value(s),
    }
}

fn control_vec(a: &ControlVecArgs) -> Result<Outputs> {
    let octant: StyleOctant = a.octant.parse()?;
    let spec = ControlSpec::new(a.emotion.clone(), octant, parse_intensity(&a.intensity)?)?;
    let easv = make_control_vector(&spec);
    let line = serde_json::to_string(&easv).map_err(|e| Error::parse("easv", e))? + "\n";
    let mut out = Outputs::default();
    if let Some(path) = &a.out {
        out.file(path, line.clone());
    }
    out.stdout = line;
    Ok(out)
}

#[derive(Deserialize)]
struct VadLine {
    id: String,
    vad: VadPoint,
}

fn read_vad_file(path: &Path) -> Result<BTreeMap<String, VadPoint>> {
    let mut map = BTreeMap::new();
    for (i, line) in read_text(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let l: VadLine = serde_json::from_str(line).map_err(|e| {
            Error::parse(format!("{}:{}", path.display(), i + 1), e)
        })?;
        if map.insert(l.id.clone(), l.vad).is_some() {
            return Err(Error::DuplicateId(l.id));
        }
    }
    Ok(map)
}

fn parse_center(s: &str) -> Result<Centroid> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse("--center", e))?;
    let point: [f64; 3] = parts
        .try_into()
        .map_err(|_| Error::parse("--center", "expected three comma-separated numbers"))?;
    Centroid::neutral_at(point)
}

#[derive(Serialize)]
struct SvasScore<'a> {
    id: &'a str,
    svas: f64,
}

fn svas_cmd(a: &SvasArgs) -> Result<Outputs> {
    let center = match (&a.neutral_manifest, &a.center) {
        (Some(m), _) => neutral_center(&load_manifest(m, &a.neutral_label)?.neutral_points())
            .map_err(|_| Error::NoNeutralRecords(a.neutral_label.clone()))?,
        (None, Some(c)) => parse_center(c)?,
        (None, None) => return Err(Error::InvalidArgument("need --neutral-manifest or --center".into())),
    };
    let synth = read_vad_file(&a.synth)?;
    let reference = read_vad_file(&a.reference)?;
    if synth.is_empty() {
        return Err(Error::EmptyInput("synthesized VAD file"));
    }
    let mut scores = Vec::with_capacity(synth.len());
    for (id, s) in &synth {
        let r = reference
            .get(id)
            .ok_or_else(|| Error::UnresolvedId(format!("{id} (reference VAD)")))?;
        let v = svas(*s, *r, &center).map_err(|e| Error::parse(format!("svas for `{id}`"), e))?;
        scores.push(SvasScore { id, svas: v });
    }
    let mean = scores.iter().map(|s| s.svas).sum::<f64>() / scores.len() as f64;
    let doc = json!({ "center": center.point, "mean": mean, "scores": scores });
    finish_json(doc, a.out.as_deref())
}

fn finish_json(doc: serde_json::Value, path: Option<&Path>) -> Result<Outputs> {
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::parse("output", e))? + "\n";
    let mut out = Outputs::default();
    if let Some(p) = path {
        out.file(p, text.clone());
    }
    out.stdout = text;
    Ok(out)
}

fn read_vectors(path: &Path) -> Result<Vec<Vec<f64>>> {
    read_text(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.split_whitespace()
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(format!("{}:{}", path.display(), i + 1), e))
        })
        .collect()
}

fn read_labels(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

fn metrics_cmd(a: &MetricsArgs) -> Result<Outputs> {
    let mut doc = serde_json::Map::new();
    if let (Some(sp), Some(rp)) = (&a.emb_synth, &a.emb_ref) {
        let s = read_vectors(sp)?;
        let r = read_vectors(rp)?;
        if s.len() != r.len() {
            return Err(Error::DimensionMismatch {
                left: s.len(),
                right: r.len(),
            });
        }
        if s.is_empty() {
            return Err(Error::EmptyInput("embedding files"));
        }
        let per_row = s.iter().zip(&r).map(|(x, y)| eecs(x, y)).collect::<Result<Vec<_>>>()?;
        let mean = per_row.iter().sum::<f64>() / per_row.len() as f64;
        doc.insert("eecs".into(), json!(mean));
        doc.insert("eecs_per_row".into(), json!(per_row));
    }
    if let (Some(pp), Some(rp)) = (&a.pred_labels, &a.ref_labels) {
        doc.insert("eca".into(), json!(eca(&read_labels(pp)?, &read_labels(rp)?)?));
    }
    if let (Some(sp), Some(ep)) = (&a.spk_emb, &a.emo_emb) {
        let s = EmbeddingBatch::new(read_vectors(sp)?)?;
        let e = EmbeddingBatch::new(read_vectors(ep)?)?;
        doc.insert("orthogonality_loss".into(), json!(orthogonality_loss(&s, &e)?));
    }
    if let (Some(tp), Some(rp)) = (&a.track, &a.track_ref) {
        let (t, r) = align_tracks(&F0Track::parse(&read_text(tp)?)?, &F0Track::parse(&read_text(rp)?)?);
        doc.insert("frames".into(), json!(t.len()));
        doc.insert("rmse_f0".into(), json!(rmse_f0(&t, &r)?));
        doc.insert("rmse_period".into(), json!(rmse_period(&t, &r)?));
        doc.insert("f1_vuv".into(), json!(f1_vuv(&t, &r)?));
    }
    if doc.is_empty() {
        return Err(Error::InvalidArgument(
            "no inputs: give --emb-synth/--emb-ref, --pred-labels/--ref-labels, --spk-emb/--emo-emb or --track/--track-ref".into(),
        ));
    }
    finish_json(serde_json::Value::Object(doc), a.out.as_deref())
}

fn audio_list(a: &ProsodyArgs) -> Result<Vec<(String, PathBuf)>> {
    if let Some(list) = &a.list {
        let base = list.parent().unwrap_or(Path::new(""));
        let mut out = Vec::new();
        for (i, line) in read_text(list)?.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, path) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::parse(format!("{}:{}", list.display(), i + 1), "expected `id path`"))?;
            out.push((id.to_string(), base.join(path.trim())));
        }
        return Ok(out);
    }
    let path = a.manifest.as_ref().expect("clap enforces --list or --manifest");
    let base = path.parent().unwrap_or(Path::new(""));
    let manifest = load_manifest(path, DEFAULT_NEUTRAL_LABEL)?;
    manifest
        .records()
        .iter()
        .map(|r| {
            r.audio_path
                .as_ref()
                .map(|p| (r.id.clone(), base.join(p)))
                .ok_or_else(|| Error::InvalidArgument(format!("record `{}` has no audio_path", r.id)))
        })
        .collect()
}

#[derive(Serialize)]
struct ProsodyLine<'a> {
    id: &'a str,
    #[serde(flatten)]
    stats: &'a crate::prosody::ProsodyStats,
}

fn prosody_cmd(a: &ProsodyArgs) -> Result<Outputs> {
    let cfg = ProsodyConfig {
        window: a.window,
        hop: a.hop,
        f_min: a.f_min,
        f_max: a.f_max,
        threshold: a.threshold,
    };
    let mut items = audio_list(a)?;
    items.sort_by(|x, y| x.0.cmp(&y.0));
    if let Some(w) = items.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateId(w[0].0.clone()));
    }
    let results = items
        .par_iter()
        .map(|(id, path)| {
            let audio = read_wav(path)?;
            let stats = utterance_prosody(&audio, &cfg).map_err(|e| Error::parse(format!("`{id}`"), e))?;
            let track = match a.tracks_dir {
                Some(_) => {
                    let mut buf = Vec::new();
                    crate::prosody::estimate_f0(&audio, &cfg)?.write_to(&mut buf)?;
                    Some(buf)
                }
                None => None,
            };
            Ok((stats, track))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = Outputs::default();
    let mut text = String::new();
    for ((id, _), (stats, track)) in items.iter().zip(&results) {
        text.push_str(&serde_json::to_string(&ProsodyLine { id, stats }).map_err(|e| Error::parse("prosody", e))?);
        text.push('\n');
        if let (Some(dir), Some(track)) = (&a.tracks_dir, track) {
            out.file(&dir.join(format!("{id}.f0")), track.clone());
        }
    }
    if let Some(dir) = &a.tracks_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    out.file(&a.out, text);
    Ok(out)
}

fn analyze(a: &AnalyzeArgs) -> Result<Outputs> {
    let format: ReportFormat = a.format.parse()?;
    let manifest = load_manifest(&a.manifest, &a.neutral_label)?;
    let easvs: Vec<EasvRecord> = parse_easv_records(&read_text(&a.easv)?)?;
    let prosody: HashMap<_, _> = parse_prosody_records(&read_text(&a.prosody)?)?;
    let report = build_report(&easvs, &prosody, &manifest)?;
    let mut out = Outputs::default();
    out.file(&a.out, render_report(&report, format));
    Ok(out)
}

fn parse_pairs(path: &Path) -> Result<Vec<IntensityPair>> {
    let mut pairs = Vec::new();
    for (i, line) in read_text(path)?.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |r: &str| Error::parse(format!("{}:{}", path.display(), i + 1), r);
        let f: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        let [lo, hi, judged] = f[..] else {
            return Err(bad("expected `r_low r_high judged`"));
        };
        let judged = match judged.to_ascii_lowercase().as_str() {
            "1" | "true" => true,
            "0" | "false" => false,
            _ => return Err(bad("judgment must be 1/0 or true/false")),
        };
        pairs.push(IntensityPair {
            r_low: parse_intensity(lo).map_err(|_| bad("bad r_low"))?,
            r_high: parse_intensity(hi).map_err(|_| bad("bad r_high"))?,
            judged_high_is_second: judged,
        });
    }
    Ok(pairs)
}

fn pair_acc(a: &PairAccArgs) -> Result<Outputs> {
    let pairs = parse_pairs(&a.pairs)?;
    let acc = pair_order_accuracy(&pairs)?;
    finish_json(json!({ "pairs": pairs.len(), "accuracy": acc }), a.out.as_deref())
}
