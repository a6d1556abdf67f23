//! Per-utterance acoustic descriptors.
//!
//! One shared pitch track defines "voiced" for all three features, so the
//! exclusion masks are consistent: median f0 over voiced frames, mean HNR
//! over voiced frames, and a formant-spacing VTL estimate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{AudioClip, AudioError};
use crate::classifier::FeatureKind;
use crate::config::AnalysisConfig;
use crate::hnr::mean_hnr_with_track;
use crate::pitch::{track_pitch, PitchTrack};
use crate::vtl::estimate_vtl_with_track;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("clip of {actual_s:.3} s is shorter than the {required_s:.3} s analysis window")]
    ClipTooShort { required_s: f64, actual_s: f64 },
    #[error("no voiced frames")]
    NoVoicedFrames,
    #[error("fewer than two stable formants in every voiced frame")]
    FormantEstimationFailed,
    #[error(transparent)]
    Audio(#[from] AudioError),
}

/// A failed feature within an otherwise analyzable utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureFailure {
    pub feature: FeatureKind,
    pub reason: String,
}

/// The per-utterance feature triple plus voicing diagnostics.
///
/// A feature that could not be computed is `None`, with the reason listed
/// in `failures`. `vtl_in_range` flags estimates outside the plausible
/// human range of (5, 30) cm; the value itself is never clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcousticFeatures {
    pub median_f0_hz: Option<f64>,
    pub mean_hnr_db: Option<f64>,
    pub vtl_cm: Option<f64>,
    pub vtl_in_range: Option<bool>,
    pub voiced_frame_count: usize,
    pub total_frame_count: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<FeatureFailure>,
}

impl AcousticFeatures {
    pub fn value(&self, feature: FeatureKind) -> Option<f64> {
        match feature {
            FeatureKind::F0 => self.median_f0_hz,
            FeatureKind::Hnr => self.mean_hnr_db,
            FeatureKind::Vtl => self.vtl_cm,
        }
    }
}

/// Plausible human vocal tract length range in cm, exclusive bounds.
pub const VTL_PLAUSIBLE_CM: (f64, f64) = (5.0, 30.0);

/// Median f0 over voiced frames only; an even count averages the two
/// central values.
pub fn median_f0(track: &PitchTrack) -> Result<f64, FeatureError> {
    let mut voiced = track.voiced_values();
    if voiced.is_empty() {
        return Err(FeatureError::NoVoicedFrames);
    }
    voiced.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = voiced.len();
    Ok(if n % 2 == 1 {
        voiced[n / 2]
    } else {
        (voiced[n / 2 - 1] + voiced[n / 2]) / 2.0
    })
}

/// Extracts all three features from one shared pitch track.
///
/// Pitch is computed once and its voicing mask is reused by HNR and VTL.
/// Per-feature failures are recorded instead of aborting the utterance;
/// only a clip too short to analyze at all is a hard error.
pub fn extract_features(
    clip: &AudioClip,
    cfg: &AnalysisConfig,
) -> Result<AcousticFeatures, FeatureError> {
    let track = track_pitch(clip, cfg)?;
    let mut failures = Vec::new();

    let median_f0_hz = unwrap_or_record(median_f0(&track), FeatureKind::F0, &mut failures);
    let mean_hnr_db = unwrap_or_record(
        mean_hnr_with_track(clip, cfg, &track),
        FeatureKind::Hnr,
        &mut failures,
    );
    let vtl_cm = unwrap_or_record(
        estimate_vtl_with_track(clip, cfg, &track),
        FeatureKind::Vtl,
        &mut failures,
    );
    let vtl_in_range = vtl_cm.map(|v| v > VTL_PLAUSIBLE_CM.0 && v < VTL_PLAUSIBLE_CM.1);

    Ok(AcousticFeatures {
        median_f0_hz,
        mean_hnr_db,
        vtl_cm,
        vtl_in_range,
        voiced_frame_count: track.voiced_frame_count(),
        total_frame_count: track.num_frames(),
        failures,
    })
}

fn unwrap_or_record(
    r: Result<f64, FeatureError>,
    feature: FeatureKind,
    failures: &mut Vec<FeatureFailure>,
) -> Option<f64> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            failures.push(FeatureFailure {
                feature,
                reason: e.to_string(),
            });
            None
        }
    }
}
