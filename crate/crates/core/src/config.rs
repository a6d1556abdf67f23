//! Analysis parameters shared by the feature extractors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid analysis config: {0}")]
    Invalid(String),
}

/// Parameters for pitch, HNR and VTL analysis.
///
/// Defaults follow the conventional settings of autocorrelation pitch
/// trackers for speech; none of them are tuned to a particular corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Lowest admissible fundamental frequency (Hz).
    pub pitch_floor_hz: f64,
    /// Highest admissible fundamental frequency (Hz).
    pub pitch_ceiling_hz: f64,
    /// Hop between analysis frames (seconds).
    pub frame_hop_s: f64,
    /// Minimum normalized autocorrelation peak for a frame to count as voiced.
    pub voicing_threshold: f64,
    /// Frames with RMS below this fraction of the clip's peak frame RMS are silent.
    pub silence_threshold: f64,
    /// HNR analysis window length in periods of the pitch floor.
    pub hnr_periods_per_window: f64,
    /// LPC order = sample_rate/1000 + this offset (evaluated at the analysis rate).
    pub lpc_order_offset: u32,
    /// Number of formants used in the formant-spacing fit.
    pub formant_count: usize,
    /// Speed of sound in cm/s for the uniform-tube length formula.
    pub speed_of_sound_cm_s: f64,
    /// Per-octave transition cost in the pitch path smoothing.
    pub octave_jump_cost: f64,
    /// Small per-candidate bias toward higher-frequency autocorrelation peaks.
    pub octave_cost: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            pitch_floor_hz: 75.0,
            pitch_ceiling_hz: 600.0,
            frame_hop_s: 0.010,
            voicing_threshold: 0.45,
            silence_threshold: 0.03,
            hnr_periods_per_window: 4.5,
            lpc_order_offset: 2,
            formant_count: 4,
            speed_of_sound_cm_s: 35_000.0,
            octave_jump_cost: 0.35,
            octave_cost: 0.01,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.pitch_floor_hz > 0.0) {
            return Err(ConfigError::Invalid("pitch_floor_hz must be positive".into()));
        }
        if !(self.pitch_ceiling_hz > self.pitch_floor_hz) {
            return Err(ConfigError::Invalid(
                "pitch_ceiling_hz must exceed pitch_floor_hz".into(),
            ));
        }
        for (name, v) in [
            ("frame_hop_s", self.frame_hop_s),
            ("voicing_threshold", self.voicing_threshold),
            ("silence_threshold", self.silence_threshold),
            ("hnr_periods_per_window", self.hnr_periods_per_window),
            ("speed_of_sound_cm_s", self.speed_of_sound_cm_s),
        ] {
            if !(v > 0.0) {
                return Err(ConfigError::Invalid(format!("{name} must be positive")));
            }
        }
        if self.formant_count < 2 {
            return Err(ConfigError::Invalid(
                "formant_count must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// Pitch analysis window length: three periods of the pitch floor.
    pub fn pitch_window_s(&self) -> f64 {
        3.0 / self.pitch_floor_hz
    }

    /// HNR analysis window length.
    pub fn hnr_window_s(&self) -> f64 {
        self.hnr_periods_per_window / self.pitch_floor_hz
    }

    /// LPC order at a given analysis sample rate.
    pub fn lpc_order(&self, sample_rate_hz: u32) -> usize {
        (sample_rate_hz / 1000 + self.lpc_order_offset) as usize
    }
}
