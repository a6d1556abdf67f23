//! Subcommand implementations.
//!
//! Each command is an ordinary function over parsed arguments so tests can
//! drive the pipeline without spawning the binary.

pub mod agree;
pub mod extract;
pub mod optimize;
pub mod report;
pub mod screen;
pub mod synth;

use clap::ValueEnum;
use thiserror::Error;

use voxscreen::classifier::FeatureKind;

use crate::manifest::ManifestError;

/// How a command finished. `PartialFailures` maps to exit code 2 so
/// screening farms can distinguish "some samples need attention" from a
/// clean run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmdOutcome {
    Clean,
    PartialFailures(usize),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Config(#[from] voxscreen::config::ConfigError),
    #[error(transparent)]
    Classifier(#[from] voxscreen::classifier::ClassifierError),
    #[error(transparent)]
    Agreement(#[from] voxscreen::agreement::AgreementError),
    #[error(transparent)]
    Lab(#[from] voxscreen::lab::LabError),
    #[error("profile has no {feature} band for vocoder tag '{vocoder_tag}'")]
    MissingBand {
        vocoder_tag: String,
        feature: FeatureKind,
    },
    #[error("{0}")]
    Invalid(String),
}

/// CLI-facing feature name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureArg {
    F0,
    Hnr,
    Vtl,
}

impl From<FeatureArg> for FeatureKind {
    fn from(f: FeatureArg) -> Self {
        match f {
            FeatureArg::F0 => FeatureKind::F0,
            FeatureArg::Hnr => FeatureKind::Hnr,
            FeatureArg::Vtl => FeatureKind::Vtl,
        }
    }
}

pub(crate) fn feature_kinds(args: &[FeatureArg]) -> Vec<FeatureKind> {
    if args.is_empty() {
        FeatureKind::ALL.to_vec()
    } else {
        let mut kinds: Vec<FeatureKind> = args.iter().map(|&f| f.into()).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }
}
