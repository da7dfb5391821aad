//! Emotion-adaptive spherical vectors (EASV) for expressive speech synthesis.
//!
//! Utterance-level valence/arousal/dominance (VAD) points are shifted to a
//! per-emotion centroid and expressed in spherical coordinates: the radius,
//! normalized with class-wise IQR bounds, acts as intensity, and the angles
//! select a style octant. Around that core the crate provides emotion metrics
//! (SVAS, EECS, ECA, orthogonality loss), YIN pitch tracking with pitch-track
//! errors, and per-octant prosody reports.
//!
//! Each stage is also available from the `easv` binary; see [`cli`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod centroid;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod manifest;
pub mod metrics;
pub mod pipeline;
pub mod prosody;
pub mod synthetic;

pub use error::{Error, Result};
pub use geometry::{Centroid, CentroidMode, ShiftedVad, SphericalVector, StyleOctant, VadPoint};
pub use manifest::{AudioBuffer, DatasetManifest, UtteranceRecord};
pub use pipeline::{ControlSpec, Easv, EasvModel, EasvRecord, IntensityLabel};
