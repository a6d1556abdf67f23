//! Harmonics-to-noise ratio.
//!
//! Frame harmonicity is the peak normalized cross-correlation of the
//! signal with itself at the frame's pitch lag; HNR in dB is
//! `10 * log10(r / (1 - r))`, the ratio of periodic to aperiodic energy.
//! For additive broadband noise this equals the SNR, which is what the
//! synthetic oracles lean on.

use crate::audio::AudioClip;
use crate::config::AnalysisConfig;
use crate::features::FeatureError;
use crate::pitch::{track_pitch, PitchTrack};

/// Frame HNR values are clamped to this range so the mean stays finite on
/// perfectly periodic synthetic inputs where r -> 1.
pub const HNR_CLAMP_DB: (f64, f64) = (-10.0, 60.0);

/// Mean HNR in dB over voiced frames, computing its own pitch track.
pub fn mean_hnr(clip: &AudioClip, cfg: &AnalysisConfig) -> Result<f64, FeatureError> {
    let track = track_pitch(clip, cfg)?;
    mean_hnr_with_track(clip, cfg, &track)
}

/// Mean HNR using an existing pitch track's voicing mask.
///
/// Unvoiced frames and frames with undefined periodicity (no usable
/// correlation peak near the pitch lag) are excluded; the remaining frame
/// values are averaged without weighting.
pub fn mean_hnr_with_track(
    clip: &AudioClip,
    cfg: &AnalysisConfig,
    track: &PitchTrack,
) -> Result<f64, FeatureError> {
    let rate = clip.sample_rate_hz() as f64;
    let window_len = (cfg.hnr_window_s() * rate).round() as usize;
    if clip.len() < window_len {
        return Err(FeatureError::ClipTooShort {
            required_s: cfg.hnr_window_s(),
            actual_s: clip.duration_s(),
        });
    }

    let samples = clip.samples();
    let mut frame_values = Vec::new();

    for (k, &f0) in track.f0_hz().iter().enumerate() {
        if !track.is_voiced(k) {
            continue;
        }
        let center = (track.times_s()[k] * rate).round() as usize;
        let start = center
            .saturating_sub(window_len / 2)
            .min(clip.len() - window_len);
        let segment = &samples[start..start + window_len];

        let lag = rate / f0;
        if let Some(r) = harmonicity_at_lag(segment, lag) {
            let r = r.clamp(0.0, 1.0 - 1e-12);
            if r <= 0.0 {
                continue; // undefined periodicity
            }
            let hnr = 10.0 * (r / (1.0 - r)).log10();
            frame_values.push(hnr.clamp(HNR_CLAMP_DB.0, HNR_CLAMP_DB.1));
        }
    }

    if frame_values.is_empty() {
        return Err(FeatureError::NoVoicedFrames);
    }
    Ok(frame_values.iter().sum::<f64>() / frame_values.len() as f64)
}

// Half-width of the sinc interpolation used for sub-sample peak refinement.
const SINC_HALF_WIDTH: usize = 30;

// Peak normalized cross-correlation in a band around the expected pitch
// lag. The correlation sequence is band-limited like the signal, so the
// true (sub-sample) peak height is recovered by sinc interpolation; a
// parabola through integer lags badly underestimates sharp peaks, which
// turns perfectly periodic frames with fractional periods into spuriously
// modest harmonicity.
fn harmonicity_at_lag(segment: &[f64], expected_lag: f64) -> Option<f64> {
    let n = segment.len();
    let lo = ((0.8 * expected_lag).floor() as usize).max(2);
    let hi = ((1.25 * expected_lag).ceil() as usize).min(n.saturating_sub(2));
    if lo >= hi {
        return None;
    }

    let mean = segment.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = segment.iter().map(|&s| s - mean).collect();

    // Prefix sums of squares for the energy normalization terms.
    let mut sq_prefix = vec![0.0f64; n + 1];
    for (i, &v) in x.iter().enumerate() {
        sq_prefix[i + 1] = sq_prefix[i] + v * v;
    }

    let r_at = |tau: usize| -> f64 {
        let m = n - tau;
        let dot: f64 = x[..m].iter().zip(&x[tau..]).map(|(&a, &b)| a * b).sum();
        let e1 = sq_prefix[m];
        let e2 = sq_prefix[n] - sq_prefix[tau];
        if e1 <= 0.0 || e2 <= 0.0 {
            0.0
        } else {
            dot / (e1 * e2).sqrt()
        }
    };

    // Evaluate r over the search band plus the margin the interpolator needs.
    let ext_lo = lo.saturating_sub(SINC_HALF_WIDTH).max(1);
    let ext_hi = (hi + SINC_HALF_WIDTH).min(n - 1);
    let values: Vec<f64> = (ext_lo..=ext_hi).map(r_at).collect();

    let mut best_tau = lo;
    let mut best_r = f64::NEG_INFINITY;
    for tau in lo..=hi {
        let r = values[tau - ext_lo];
        if r > best_r {
            best_r = r;
            best_tau = tau;
        }
    }
    if !best_r.is_finite() {
        return None;
    }

    let interp = |tau: f64| -> f64 {
        let center = tau.round() as isize;
        let mut acc = 0.0;
        for k in (center - SINC_HALF_WIDTH as isize)..=(center + SINC_HALF_WIDTH as isize) {
            let idx = k - ext_lo as isize;
            if idx < 0 || idx as usize >= values.len() {
                continue;
            }
            let u = tau - k as f64;
            let s = if u.abs() < 1e-12 {
                1.0
            } else {
                (std::f64::consts::PI * u).sin() / (std::f64::consts::PI * u)
            };
            acc += values[idx as usize] * s;
        }
        acc
    };

    // Golden-section maximization of the interpolated peak within one
    // sample of the integer maximum.
    let mut a = best_tau as f64 - 1.0;
    let mut b = best_tau as f64 + 1.0;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = interp(c);
    let mut fd = interp(d);
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = interp(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = interp(d);
        }
    }
    Some(best_r.max(fc.max(fd)))
}
