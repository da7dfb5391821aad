//! Dataset manifests and WAV input.
//!
//! A manifest is UTF-8 text with one JSON object per line:
//!
//! ```text
//! {"id":"u1","speaker":"s1","emotion":"neutral","vad":[0.5,0.5,0.5]}
//! {"id":"u2","speaker":"s1","emotion":"happy","vad":[0.8,0.7,0.6],"audio_path":"wav/u2.wav"}
//! ```
//!
//! Required keys are `id`, `speaker`, `emotion` and `vad`. Optional keys are
//! `audio_path`, `emo_embedding` and `spk_embedding`; anything else is ignored.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::geometry::VadPoint;

pub const DEFAULT_NEUTRAL_LABEL: &str = "neutral";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub id: String,
    pub speaker: String,
    pub emotion: String,
    pub vad: VadPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emo_embedding: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spk_embedding: Option<Vec<f64>>,
}

/// Records sorted by id, plus the label that marks the neutral class.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    records: Vec<UtteranceRecord>,
    neutral_label: String,
}

impl DatasetManifest {
    /// Validates ids and sorts the records.
    pub fn new(mut records: Vec<UtteranceRecord>, neutral_label: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if r.id.is_empty() {
                return Err(Error::InvalidArgument("empty record id".into()));
            }
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        records.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(Self {
            records,
            neutral_label: neutral_label.into(),
        })
    }

    pub fn records(&self) -> &[UtteranceRecord] {
        &self.records
    }

    pub fn neutral_label(&self) -> &str {
        &self.neutral_label
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&UtteranceRecord> {
        self.records
            .binary_search_by(|r| r.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn is_neutral(&self, record: &UtteranceRecord) -> bool {
        record.emotion == self.neutral_label
    }

    /// Emotion labels in order of first appearance.
    pub fn emotions(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.records
            .iter()
            .map(|r| r.emotion.as_str())
            .filter(|e| seen.insert(*e))
            .collect()
    }

    pub fn vad_of_class(&self, emotion: &str) -> Vec<VadPoint> {
        self.records
            .iter()
            .filter(|r| r.emotion == emotion)
            .map(|r| r.vad)
            .collect()
    }

    pub fn neutral_points(&self) -> Vec<VadPoint> {
        self.vad_of_class(&self.neutral_label)
    }

    /// Writes the manifest back in line-delimited form.
    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        for r in &self.records {
            let line = serde_json::to_string(r).map_err(|e| Error::parse("manifest", e))?;
            writeln!(out, "{line}").map_err(|e| Error::io("<manifest output>", e))?;
        }
        Ok(())
    }
}

/// Parses a manifest with the default neutral label.
pub fn parse_manifest(source: impl BufRead) -> Result<DatasetManifest> {
    parse_manifest_with_label(source, DEFAULT_NEUTRAL_LABEL)
}

pub fn parse_manifest_with_label(
    source: impl BufRead,
    neutral_label: &str,
) -> Result<DatasetManifest> {
    let mut records = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::MalformedLine {
            line: line_no,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_line(&line, line_no)?);
    }
    DatasetManifest::new(records, neutral_label)
}

pub fn load_manifest(path: &Path, neutral_label: &str) -> Result<DatasetManifest> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_manifest_with_label(std::io::BufReader::new(file), neutral_label)
}

fn parse_line(line: &str, line_no: usize) -> Result<UtteranceRecord> {
    let malformed = |reason: String| Error::MalformedLine {
        line: line_no,
        reason,
    };
    let value: Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    let Value::Object(obj) = value else {
        return Err(malformed("expected a JSON object".into()));
    };

    let id = required_str(&obj, "id", line_no)?;
    let speaker = required_str(&obj, "speaker", line_no)?;
    let emotion = required_str(&obj, "emotion", line_no)?;
    if id.is_empty() {
        return Err(malformed("empty id".into()));
    }

    let vad = obj.get("vad").ok_or(Error::MissingKey {
        line: line_no,
        key: "vad",
    })?;
    let comps: Vec<f64> = serde_json::from_value(vad.clone())
        .map_err(|_| malformed("vad must be an array of 3 numbers".into()))?;
    let [v, a, d]: [f64; 3] = comps
        .try_into()
        .map_err(|_| malformed("vad must have exactly 3 components".into()))?;
    let vad = VadPoint::new(v, a, d).map_err(|_| Error::VadOutOfRange { line: line_no })?;

    let audio_path = match obj.get("audio_path") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => return Err(malformed("audio_path must be a string".into())),
    };
    let emo_embedding = optional_vector(&obj, "emo_embedding", line_no)?;
    let spk_embedding = optional_vector(&obj, "spk_embedding", line_no)?;

    Ok(UtteranceRecord {
        id,
        speaker,
        emotion,
        vad,
        audio_path,
        emo_embedding,
        spk_embedding,
    })
}

fn required_str(obj: &Map<String, Value>, key: &'static str, line: usize) -> Result<String> {
    match obj.get(key) {
        None | Some(Value::Null) => Err(Error::MissingKey { line, key }),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(Error::MalformedLine {
            line,
            reason: format!("`{key}` must be a string"),
        }),
    }
}

fn optional_vector(obj: &Map<String, Value>, key: &str, line: usize) -> Result<Option<Vec<f64>>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => {
            let vec: Vec<f64> = serde_json::from_value(v.clone()).map_err(|_| Error::MalformedLine {
                line,
                reason: format!("`{key}` must be an array of numbers"),
            })?;
            if vec.is_empty() {
                return Err(Error::MalformedLine {
                    line,
                    reason: format!("`{key}` must be non-empty"),
                });
            }
            Ok(Some(vec))
        }
    }
}

/// Mono PCM audio scaled into `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::EmptyInput("audio samples"));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Reads 16-bit PCM WAV; stereo is averaged down to mono.
pub fn read_wav(path: &Path) -> Result<AudioBuffer> {
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => wav_error(other),
    })?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedEncoding(format!(
            "{}: {:?} {}-bit, expected 16-bit PCM",
            path.display(),
            spec.sample_format,
            spec.bits_per_sample
        )));
    }
    let channels = spec.channels as usize;
    if !(1..=2).contains(&channels) {
        return Err(Error::UnsupportedEncoding(format!(
            "{}: {channels} channels, expected mono or stereo",
            path.display()
        )));
    }
    let raw = reader
        .into_samples::<i16>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(wav_error)?;
    let samples = raw
        .chunks_exact(channels)
        .map(|frame| {
            let sum: f64 = frame.iter().map(|&s| s as f64 / 32768.0).sum();
            sum / channels as f64
        })
        .collect();
    AudioBuffer::new(samples, spec.sample_rate)
}

fn wav_error(e: hound::Error) -> Error {
    match e {
        hound::Error::Unsupported => Error::UnsupportedEncoding("not 16-bit integer PCM".into()),
        hound::Error::FormatError(msg) => Error::UnsupportedEncoding(msg.to_string()),
        other => Error::Wav(other),
    }
}

/// Writes a mono 16-bit PCM WAV, clipping to `[-1, 1]`.
pub fn write_wav(path: &Path, audio: &AudioBuffer) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for &s in &audio.samples {
        let q = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        writer.write_sample(q)?;
    }
    writer.finalize()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<DatasetManifest> {
        parse_manifest(text.as_bytes())
    }

    #[test]
    fn single_record() {
        let m = parse(r#"{"id":"u1","speaker":"s1","emotion":"neutral","vad":[0.5,0.5,0.5]}"#)
            .unwrap();
        assert_eq!(m.len(), 1);
        let r = &m.records()[0];
        assert_eq!(r.vad.to_array(), [0.5, 0.5, 0.5]);
        assert_eq!(r.audio_path, None);
        assert_eq!(r.emo_embedding, None);
        assert_eq!(m.neutral_label(), "neutral");
    }

    #[test]
    fn sorted_by_id_and_unknown_keys_ignored() {
        let m = parse(concat!(
            r#"{"id":"b","speaker":"s","emotion":"sad","vad":[0,0,0],"extra":42}"#,
            "\n\n",
            r#"{"id":"a","speaker":"s","emotion":"sad","vad":[1,1,1],"audio_path":"x.wav"}"#,
        ))
        .unwrap();
        let ids: Vec<_> = m.records().iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert_eq!(m.get("a").unwrap().audio_path, Some(PathBuf::from("x.wav")));
        assert!(m.get("c").is_none());
    }

    #[test]
    fn error_paths() {
        let err = parse(r#"{"id":"u","speaker":"s","emotion":"e","vad":[1.2,0,0]}"#).unwrap_err();
        assert_eq!(err.to_string(), "vad out of range at line 1");

        let err = parse(r#"{"id":"u","speaker":"s","vad":[0,0,0]}"#).unwrap_err();
        assert!(matches!(err, Error::MissingKey { line: 1, key: "emotion" }));

        let err = parse("{\"id\":\"u\",\"speaker\":\"s\",\"emotion\":\"e\",\"vad\":[0,0,0]}\nnot json")
            .unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 2, .. }), "{err}");

        let dup = concat!(
            r#"{"id":"u","speaker":"s","emotion":"e","vad":[0,0,0]}"#,
            "\n",
            r#"{"id":"u","speaker":"s","emotion":"e","vad":[0,0,0]}"#
        );
        assert!(matches!(parse(dup).unwrap_err(), Error::DuplicateId(id) if id == "u"));

        let short = parse(r#"{"id":"u","speaker":"s","emotion":"e","vad":[0,0]}"#).unwrap_err();
        assert!(matches!(short, Error::MalformedLine { .. }));

        let empty_emb =
            parse(r#"{"id":"u","speaker":"s","emotion":"e","vad":[0,0,0],"emo_embedding":[]}"#);
        assert!(empty_emb.is_err());
    }

    #[test]
    fn emotions_in_first_appearance_order() {
        let m = parse(concat!(
            r#"{"id":"c","speaker":"s","emotion":"happy","vad":[0,0,0]}"#,
            "\n",
            r#"{"id":"a","speaker":"s","emotion":"sad","vad":[0,0,0]}"#,
            "\n",
            r#"{"id":"b","speaker":"s","emotion":"happy","vad":[0,0,0]}"#,
        ))
        .unwrap();
        assert_eq!(m.emotions(), ["sad", "happy"]);
    }

    #[test]
    fn wav_mono_and_stereo() {
        let dir = tempfile::tempdir().unwrap();

        let mono = dir.path().join("mono.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 22050,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&mono, spec).unwrap();
        for i in 0..22050 {
            w.write_sample(((i % 200) as i16 - 100) * 100).unwrap();
        }
        w.finalize().unwrap();
        let buf = read_wav(&mono).unwrap();
        assert_eq!(buf.len(), 22050);
        assert_eq!(buf.sample_rate(), 22050);
        assert!(buf.samples().iter().all(|s| (-1.0..=1.0).contains(s)));

        let stereo = dir.path().join("stereo.wav");
        let mut w = hound::WavWriter::create(
            &stereo,
            hound::WavSpec {
                channels: 2,
                ..spec
            },
        )
        .unwrap();
        w.write_sample(16384i16).unwrap();
        w.write_sample(-16384i16).unwrap();
        w.write_sample(i16::MIN).unwrap();
        w.write_sample(i16::MIN).unwrap();
        w.finalize().unwrap();
        let buf = read_wav(&stereo).unwrap();
        assert_eq!(buf.samples(), &[0.0, -1.0]);
    }

    #[test]
    fn wav_rejects_8_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u8.wav");
        let mut w = hound::WavWriter::create(
            &path,
            hound::WavSpec {
                channels: 1,
                sample_rate: 8000,
                bits_per_sample: 8,
                sample_format: hound::SampleFormat::Int,
            },
        )
        .unwrap();
        for _ in 0..100 {
            w.write_sample(10i8).unwrap();
        }
        w.finalize().unwrap();
        let err = read_wav(&path).unwrap_err();
        assert!(err.to_string().contains("unsupported encoding"), "{err}");

        assert!(matches!(
            read_wav(&dir.path().join("missing.wav")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn wav_write_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.wav");
        let audio = AudioBuffer::new(vec![0.0, 0.5, -0.5, 1.0], 16000).unwrap();
        write_wav(&path, &audio).unwrap();
        let back = read_wav(&path).unwrap();
        for (a, b) in audio.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    fn record_strategy() -> impl Strategy<Value = UtteranceRecord> {
        (
            "[a-z0-9]{1,8}",
            "[a-z]{1,4}",
            prop::sample::select(vec!["neutral", "happy", "sad"]),
            prop::array::uniform3(0.0f64..=1.0),
            prop::option::of(prop::collection::vec(-5.0f64..5.0, 1..4)),
        )
            .prop_map(|(id, speaker, emotion, vad, emb)| UtteranceRecord {
                id,
                speaker,
                emotion: emotion.to_string(),
                vad: VadPoint::try_from(vad).unwrap(),
                audio_path: None,
                emo_embedding: emb,
                spk_embedding: None,
            })
    }

    proptest! {
        #[test]
        fn serialize_parse_identity(records in prop::collection::vec(record_strategy(), 0..12)) {
            let mut seen = HashSet::new();
            let records: Vec<_> = records.into_iter().filter(|r| seen.insert(r.id.clone())).collect();
            let m = DatasetManifest::new(records, "neutral").unwrap();
            let mut buf = Vec::new();
            m.write_to(&mut buf).unwrap();
            let back = parse_manifest(buf.as_slice()).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn pcm_scaling_bound(raw in prop::collection::vec(any::<i16>(), 1..64)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("x.wav");
            let spec = hound::WavSpec {
                channels: 1,
                sample_rate: 8000,
                bits_per_sample: 16,
                sample_format: hound::SampleFormat::Int,
            };
            let mut w = hound::WavWriter::create(&path, spec).unwrap();
            for &s in &raw {
                w.write_sample(s).unwrap();
            }
            w.finalize().unwrap();
            let audio = read_wav(&path).unwrap();
            prop_assert_eq!(audio.len(), raw.len());
            for (&x, &s) in audio.samples().iter().zip(&raw) {
                prop_assert_eq!(x, s as f64 / 32768.0);
                prop_assert!((-1.0..1.0).contains(&x));
            }
        }
    }
}
