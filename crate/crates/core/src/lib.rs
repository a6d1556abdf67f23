//! Acoustic consistency screening for voice-cloning outputs.
//!
//! Severely degraded synthetic speech tends to break one of two things:
//! the source structure (gross pitch) or the harmonic clarity of the
//! signal. This crate extracts three low-dimensional descriptors per
//! utterance - median f0, mean HNR over voiced frames, and a
//! formant-spacing vocal tract length - and screens input/output pairs
//! with an asymmetric acceptance band around the identity line in each
//! feature's input-output space.
//!
//! Modules:
//! - [`audio`]: WAV decode/encode, framing, band-limited resampling.
//! - [`pitch`], [`hnr`], [`vtl`], [`features`]: feature extraction.
//! - [`spectrogram`]: STFT magnitude grids for inspection.
//! - [`classifier`]: deviations, threshold bands, fitting and metrics.
//! - [`agreement`]: rater consensus and cross-classifier flow matrices.
//! - [`lab`]: synthetic signals, degradations and labeled corpora.

// Validation deliberately uses `!(x > 0.0)` so NaN parameters are rejected
// along with non-positive ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agreement;
pub mod audio;
pub mod classifier;
pub mod config;
pub mod features;
pub mod hnr;
pub mod lab;
pub mod pitch;
pub mod spectrogram;
pub mod vtl;

pub use agreement::{consensus_stats, flow_matrix, AgreementTable, FlowMatrix, RaterVotes};
pub use audio::{
    decode_wav, encode_wav, frame_signal, resample, AudioClip, AudioError, WindowKind,
};
pub use classifier::{
    classify, deviation, evaluate, optimize_band, BandFit, BandProfile, ClassifierError,
    ConfusionMatrix, Deviation, FeatureKind, LabeledDeviation, Metrics, Quality, SamplePair,
    ThresholdBand,
};
pub use config::AnalysisConfig;
pub use features::{extract_features, median_f0, AcousticFeatures, FeatureError};
pub use hnr::mean_hnr;
pub use lab::{
    build_corpus, degrade, synthesize, CorpusEntry, CorpusRecipe, DegradationKind,
    DegradationSpec, LabError, SignalKind, SignalSpec,
};
pub use pitch::{track_pitch, PitchTrack};
pub use spectrogram::{spectrogram, Spectrogram};
pub use vtl::estimate_vtl;
