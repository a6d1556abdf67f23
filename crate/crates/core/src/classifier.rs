//! Consistency classification in input-output feature space.
//!
//! A sample pair is summarized by the signed deviation `d = Y - X` of an
//! acoustic feature between source input and synthesized output. Perfect
//! preservation lies on the identity line `Y = X`; an asymmetric acceptance
//! band `t_neg <= d <= t_pos` around that line separates acceptable from
//! degraded outputs. The two thresholds are fitted independently on the
//! negative and positive half-spaces by maximizing agreement with human
//! labels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::AcousticFeatures;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("feature {0} unavailable on the {1} side of pair {2}")]
    FeatureUnavailable(FeatureKind, &'static str, String),
    #[error("deviation is {actual} but band is {expected}")]
    FeatureKindMismatch {
        expected: FeatureKind,
        actual: FeatureKind,
    },
    #[error("no labeled pairs with defined deviations")]
    NoLabeledPairs,
}

/// Which acoustic feature a deviation or band refers to.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    F0,
    Hnr,
    Vtl,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 3] = [FeatureKind::F0, FeatureKind::Hnr, FeatureKind::Vtl];

    pub fn unit(self) -> &'static str {
        match self {
            FeatureKind::F0 => "Hz",
            FeatureKind::Hnr => "dB",
            FeatureKind::Vtl => "cm",
        }
    }
}

impl std::fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureKind::F0 => write!(f, "f0"),
            FeatureKind::Hnr => write!(f, "hnr"),
            FeatureKind::Vtl => write!(f, "vtl"),
        }
    }
}

/// Binary quality judgment, used both for human labels and classifier decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quality {
    Good,
    Bad,
}

/// One screening unit: features of the source input (X) and the
/// synthesized output (Y), with an optional human label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplePair {
    pub id: String,
    pub input_features: AcousticFeatures,
    pub output_features: AcousticFeatures,
    pub human_label: Option<Quality>,
    pub vocoder_tag: String,
}

/// Signed deviation from the identity line for one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub feature_kind: FeatureKind,
    /// `Y - X` in the feature's own unit; positive lies above the identity line.
    pub d: f64,
}

/// Computes `d = Y - X` for the chosen feature.
///
/// Errors with [`ClassifierError::FeatureUnavailable`] when either side
/// failed extraction for that feature; such pairs are routed to a
/// mandatory-review bucket rather than silently dropped.
pub fn deviation(pair: &SamplePair, feature: FeatureKind) -> Result<Deviation, ClassifierError> {
    let x = pair
        .input_features
        .value(feature)
        .ok_or_else(|| ClassifierError::FeatureUnavailable(feature, "input", pair.id.clone()))?;
    let y = pair
        .output_features
        .value(feature)
        .ok_or_else(|| ClassifierError::FeatureUnavailable(feature, "output", pair.id.clone()))?;
    Ok(Deviation {
        feature_kind: feature,
        d: y - x,
    })
}

/// Acceptance band around the identity line: `t_neg < 0 < t_pos`.
///
/// `None` on either side is the unbounded sentinel - that side accepts any
/// deviation. It appears when a training half-space was empty or when
/// accepting everything on a side was optimal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBand {
    pub feature_kind: FeatureKind,
    pub t_neg: Option<f64>,
    pub t_pos: Option<f64>,
}

impl ThresholdBand {
    pub fn new(
        feature_kind: FeatureKind,
        t_neg: Option<f64>,
        t_pos: Option<f64>,
    ) -> Result<Self, &'static str> {
        if let Some(t) = t_neg {
            if !(t < 0.0) {
                return Err("t_neg must be negative");
            }
        }
        if let Some(t) = t_pos {
            if !(t > 0.0) {
                return Err("t_pos must be positive");
            }
        }
        Ok(Self {
            feature_kind,
            t_neg,
            t_pos,
        })
    }

    fn accepts(&self, d: f64) -> bool {
        let above_neg = self.t_neg.is_none_or(|t| d >= t);
        let below_pos = self.t_pos.is_none_or(|t| d <= t);
        above_neg && below_pos
    }
}

/// Classifies a deviation against a band: Good iff `t_neg <= d <= t_pos`,
/// boundaries inclusive on both sides.
pub fn classify(dev: Deviation, band: &ThresholdBand) -> Result<Quality, ClassifierError> {
    if dev.feature_kind != band.feature_kind {
        return Err(ClassifierError::FeatureKindMismatch {
            expected: band.feature_kind,
            actual: dev.feature_kind,
        });
    }
    Ok(if band.accepts(dev.d) {
        Quality::Good
    } else {
        Quality::Bad
    })
}

/// A labeled deviation, the unit the optimizer works on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledDeviation {
    pub d: f64,
    pub label: Quality,
}

/// Result of fitting one acceptance band.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandFit {
    pub band: ThresholdBand,
    /// Training accuracy over all labeled pairs used in the fit.
    pub train_accuracy: f64,
    pub train_size: usize,
    pub warnings: Vec<String>,
}

/// Fits the acceptance band that maximizes training accuracy.
///
/// The negative threshold is searched using only samples with `d < 0` and
/// the positive threshold using only samples with `d > 0`; pairs with
/// `d = 0` join neither search and are always classified Good. In each
/// half-space the candidate thresholds are the midpoints between
/// consecutive distinct deviation magnitudes (taking 0 as the inner edge)
/// plus the unbounded sentinel beyond the extreme value. Ties break toward
/// the larger acceptance band. An empty half-space yields the sentinel and
/// a warning.
pub fn optimize_band(
    labeled: &[LabeledDeviation],
    feature: FeatureKind,
) -> Result<BandFit, ClassifierError> {
    if labeled.is_empty() {
        return Err(ClassifierError::NoLabeledPairs);
    }

    let neg: Vec<LabeledDeviation> = labeled.iter().copied().filter(|s| s.d < 0.0).collect();
    let pos: Vec<LabeledDeviation> = labeled.iter().copied().filter(|s| s.d > 0.0).collect();
    let mut warnings = Vec::new();

    let (t_neg, neg_correct) = fit_half_space(&neg);
    if neg.is_empty() {
        warnings.push("negative half-space empty; t_neg left unbounded".to_string());
    }
    let (t_pos, pos_correct) = fit_half_space(&pos);
    if pos.is_empty() {
        warnings.push("positive half-space empty; t_pos left unbounded".to_string());
    }

    // d = 0 always classifies Good.
    let zero_correct = labeled
        .iter()
        .filter(|s| s.d == 0.0 && s.label == Quality::Good)
        .count();

    let band = ThresholdBand {
        feature_kind: feature,
        t_neg: t_neg.map(|m| -m),
        t_pos,
    };
    let train_accuracy = (neg_correct + pos_correct + zero_correct) as f64 / labeled.len() as f64;

    Ok(BandFit {
        band,
        train_accuracy,
        train_size: labeled.len(),
        warnings,
    })
}

/// Candidate threshold magnitudes for one half-space: midpoints between
/// consecutive distinct |d| values with 0 as the inner edge, plus the
/// unbounded sentinel (`None`).
pub fn half_space_candidates(samples: &[LabeledDeviation]) -> Vec<Option<f64>> {
    let mut mags: Vec<f64> = samples.iter().map(|s| s.d.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    mags.dedup();

    let mut candidates = Vec::with_capacity(mags.len() + 1);
    let mut prev = 0.0;
    for &m in &mags {
        candidates.push(Some((prev + m) / 2.0));
        prev = m;
    }
    candidates.push(None);
    candidates
}

/// Correct count for a threshold magnitude within one half-space:
/// Good inside (|d| <= t), Bad outside.
fn half_space_correct(samples: &[LabeledDeviation], threshold: Option<f64>) -> usize {
    samples
        .iter()
        .filter(|s| {
            let inside = threshold.is_none_or(|t| s.d.abs() <= t);
            match s.label {
                Quality::Good => inside,
                Quality::Bad => !inside,
            }
        })
        .count()
}

// Returns (threshold magnitude, correct count); None = unbounded.
fn fit_half_space(samples: &[LabeledDeviation]) -> (Option<f64>, usize) {
    if samples.is_empty() {
        return (None, 0);
    }
    let mut best: Option<f64> = None;
    let mut best_correct = half_space_correct(samples, None);
    // Scan from the widest band down so ties keep the wider band.
    for cand in half_space_candidates(samples).into_iter().rev() {
        let correct = half_space_correct(samples, cand);
        if correct > best_correct {
            best_correct = correct;
            best = cand;
        }
    }
    (best, best_correct)
}

/// Confusion counts; the positive class is a Bad sample flagged Bad.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u32,
    pub tn: u32,
    pub fp: u32,
    pub fn_: u32,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u32 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn record(&mut self, label: Quality, decision: Quality) {
        match (label, decision) {
            (Quality::Bad, Quality::Bad) => self.tp += 1,
            (Quality::Good, Quality::Good) => self.tn += 1,
            (Quality::Good, Quality::Bad) => self.fp += 1,
            (Quality::Bad, Quality::Good) => self.fn_ += 1,
        }
    }

    pub fn metrics(&self) -> Metrics {
        Metrics::from_counts(*self)
    }
}

/// Accuracy, sensitivity and specificity; `None` marks an undefined value
/// (empty denominator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

impl Metrics {
    pub fn from_counts(m: ConfusionMatrix) -> Self {
        let ratio = |num: u32, den: u32| {
            if den == 0 {
                None
            } else {
                Some(num as f64 / den as f64)
            }
        };
        Self {
            accuracy: ratio(m.tp + m.tn, m.total()),
            sensitivity: ratio(m.tp, m.tp + m.fn_),
            specificity: ratio(m.tn, m.tn + m.fp),
        }
    }
}

/// Evaluates a band against labeled deviations.
pub fn evaluate(
    labeled: &[LabeledDeviation],
    band: &ThresholdBand,
) -> Result<(ConfusionMatrix, Metrics), ClassifierError> {
    if labeled.is_empty() {
        return Err(ClassifierError::NoLabeledPairs);
    }
    let mut cm = ConfusionMatrix::default();
    for s in labeled {
        let decision = if band.accepts(s.d) {
            Quality::Good
        } else {
            Quality::Bad
        };
        cm.record(s.label, decision);
    }
    let metrics = cm.metrics();
    Ok((cm, metrics))
}

/// Band profiles fitted per vocoder and feature, as serialized to JSON.
///
/// Unbounded thresholds serialize as `null`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BandProfile {
    /// vocoder_tag -> feature -> fit
    pub bands: BTreeMap<String, BTreeMap<FeatureKind, BandFit>>,
}

impl BandProfile {
    pub fn insert(&mut self, vocoder_tag: &str, fit: BandFit) {
        self.bands
            .entry(vocoder_tag.to_string())
            .or_default()
            .insert(fit.band.feature_kind, fit);
    }

    pub fn get(&self, vocoder_tag: &str, feature: FeatureKind) -> Option<&BandFit> {
        self.bands.get(vocoder_tag).and_then(|m| m.get(&feature))
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}
