//! Serialized pipeline artifacts: features file, decisions file, report.
//!
//! All maps are ordered and all record lists are sorted by sample id, so
//! serialization is byte-deterministic for identical inputs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use voxscreen::agreement::FlowMatrix;
use voxscreen::classifier::{BandFit, ConfusionMatrix, FeatureKind, Metrics, Quality};
use voxscreen::features::AcousticFeatures;
use voxscreen::AnalysisConfig;

/// Per-sample screening decision; `Review` routes extraction failures to
/// a mandatory human look instead of silently dropping the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScreenDecision {
    Good,
    Bad,
    Review,
}

impl From<Quality> for ScreenDecision {
    fn from(q: Quality) -> Self {
        match q {
            Quality::Good => ScreenDecision::Good,
            Quality::Bad => ScreenDecision::Bad,
        }
    }
}

/// One manifest row after feature extraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub id: String,
    pub vocoder_tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Quality>,
    /// Input-side (X) features; `None` when the file could not be analyzed.
    pub input: Option<AcousticFeatures>,
    /// Output-side (Y) features.
    pub output: Option<AcousticFeatures>,
    /// Hard per-side failures (unreadable file, clip too short).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl FeatureRecord {
    pub fn deviation(&self, feature: FeatureKind) -> Option<f64> {
        let x = self.input.as_ref()?.value(feature)?;
        let y = self.output.as_ref()?.value(feature)?;
        Some(y - x)
    }
}

/// Output of `extract`: the analysis config plus one record per pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureFile {
    pub config: AnalysisConfig,
    pub records: Vec<FeatureRecord>,
}

/// Per-feature outcome for one sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureDecision {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
    pub decision: ScreenDecision,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// One screened sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub id: String,
    pub vocoder_tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Quality>,
    pub per_feature: BTreeMap<FeatureKind, FeatureDecision>,
    /// Combined verdict: Bad if any verdict feature says Bad, else Review
    /// if any is unavailable, else Good.
    pub verdict: ScreenDecision,
}

/// Output of `screen`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionsFile {
    /// Features participating in the combined verdict.
    pub verdict_features: Vec<FeatureKind>,
    /// The fitted bands that produced these decisions, keyed by vocoder tag.
    pub bands_used: BTreeMap<String, BTreeMap<FeatureKind, BandFit>>,
    pub records: Vec<DecisionRecord>,
}

/// Scatter row: one sample in one feature's input-output space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterRow {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub label: String,
    pub decision: String,
}

/// Per-feature section of the evaluation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureReport {
    pub bands: BTreeMap<String, BandFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
    pub scatter: Vec<ScatterRow>,
}

/// One directed flow between two classifiers' decisions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Flow {
    pub source: String,
    pub target: String,
    pub count: u32,
    pub sample_ids: Vec<String>,
}

/// Alluvial-style flows between two features, plus the raw 2x2 counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowsDocument {
    pub classifier_a: FeatureKind,
    pub classifier_b: FeatureKind,
    pub matrix: FlowMatrix,
    pub flows: Vec<Flow>,
}

impl FlowsDocument {
    pub fn from_matrix(a: FeatureKind, b: FeatureKind, matrix: FlowMatrix) -> Self {
        let flows = vec![
            Flow {
                source: format!("{a}:good"),
                target: format!("{b}:good"),
                count: matrix.both_good,
                sample_ids: matrix.both_good_ids.clone(),
            },
            Flow {
                source: format!("{a}:good"),
                target: format!("{b}:bad"),
                count: matrix.a_good_b_bad,
                sample_ids: matrix.a_good_b_bad_ids.clone(),
            },
            Flow {
                source: format!("{a}:bad"),
                target: format!("{b}:good"),
                count: matrix.a_bad_b_good,
                sample_ids: matrix.a_bad_b_good_ids.clone(),
            },
            Flow {
                source: format!("{a}:bad"),
                target: format!("{b}:bad"),
                count: matrix.both_bad,
                sample_ids: matrix.both_bad_ids.clone(),
            },
        ];
        Self {
            classifier_a: a,
            classifier_b: b,
            matrix,
            flows,
        }
    }
}

/// Consensus block mirroring the rater agreement table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsensusSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good: Option<ConsensusRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bad: Option<ConsensusRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tied_sample_ids: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsensusRow {
    pub agreeing_votes: u32,
    pub total_votes: u32,
    /// Exact percentage, not rounded.
    pub percent: f64,
}

/// The full evaluation report written by `report`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub per_feature: BTreeMap<FeatureKind, FeatureReport>,
    /// Cross-classifier agreement, keyed like "f0_vs_hnr".
    pub flows: BTreeMap<String, FlowsDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consensus: Option<ConsensusSection>,
    /// Samples routed to mandatory review.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub review_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notices: Vec<String>,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    text.push('\n');
    std::fs::write(path, text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> std::io::Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}
