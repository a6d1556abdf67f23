//! Vocal tract length from formant spacing.
//!
//! Per voiced frame, LPC analysis on a pre-emphasized copy downsampled to
//! 10 kHz yields formant frequencies as the angles of complex LPC roots
//! with bandwidth under 400 Hz. The average formant spacing dF comes from
//! a least-squares fit of the uniform-tube pattern `F_i = (2i-1) * dF / 2`,
//! and the tube length is `c / (2 * dF)`. The per-frame lengths are
//! reduced by the median.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;

use crate::audio::{resample, AudioClip, WindowKind};
use crate::config::AnalysisConfig;
use crate::features::FeatureError;
use crate::pitch::{track_pitch, PitchTrack};

const ANALYSIS_RATE_HZ: u32 = 10_000;
const LPC_WINDOW_S: f64 = 0.025;
const MAX_FORMANT_BANDWIDTH_HZ: f64 = 400.0;
const MIN_FORMANT_HZ: f64 = 90.0;

/// Vocal tract length in cm, computing its own pitch track.
pub fn estimate_vtl(clip: &AudioClip, cfg: &AnalysisConfig) -> Result<f64, FeatureError> {
    let track = track_pitch(clip, cfg)?;
    estimate_vtl_with_track(clip, cfg, &track)
}

/// Vocal tract length using an existing pitch track's voicing mask.
pub fn estimate_vtl_with_track(
    clip: &AudioClip,
    cfg: &AnalysisConfig,
    track: &PitchTrack,
) -> Result<f64, FeatureError> {
    if track.voiced_frame_count() == 0 {
        return Err(FeatureError::NoVoicedFrames);
    }

    let ds = resample(clip, ANALYSIS_RATE_HZ)?;
    let rate = ANALYSIS_RATE_HZ as f64;
    // First-order pre-emphasis from 50 Hz flattens the glottal tilt.
    let alpha = (-2.0 * PI * 50.0 / rate).exp();
    let mut x = ds.samples().to_vec();
    for i in (1..x.len()).rev() {
        x[i] -= alpha * x[i - 1];
    }

    let window_len = (LPC_WINDOW_S * rate).round() as usize;
    if x.len() < window_len {
        return Err(FeatureError::ClipTooShort {
            required_s: LPC_WINDOW_S,
            actual_s: ds.duration_s(),
        });
    }
    let window = WindowKind::Hanning.coefficients(window_len);
    let order = cfg.lpc_order(ANALYSIS_RATE_HZ);
    let max_formant_hz = rate / 2.0 - 100.0;

    let mut per_frame = Vec::new();
    for k in 0..track.num_frames() {
        if !track.is_voiced(k) {
            continue;
        }
        let center = (track.times_s()[k] * rate).round() as usize;
        let start = center
            .saturating_sub(window_len / 2)
            .min(x.len() - window_len);
        let segment = &x[start..start + window_len];
        let mean = segment.iter().sum::<f64>() / window_len as f64;
        let frame: Vec<f64> = segment
            .iter()
            .zip(&window)
            .map(|(&s, &w)| (s - mean) * w)
            .collect();

        let Some(coeffs) = burg_lpc(&frame, order) else {
            continue;
        };
        let formants = formant_frequencies(&coeffs, rate, MIN_FORMANT_HZ, max_formant_hz);
        if formants.len() < 2 {
            continue;
        }
        let used = &formants[..formants.len().min(cfg.formant_count)];
        let spacing = formant_spacing(used);
        if spacing > 0.0 {
            per_frame.push(cfg.speed_of_sound_cm_s / (2.0 * spacing));
        }
    }

    if per_frame.is_empty() {
        return Err(FeatureError::FormantEstimationFailed);
    }
    per_frame.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = per_frame.len();
    Ok(if n % 2 == 1 {
        per_frame[n / 2]
    } else {
        (per_frame[n / 2 - 1] + per_frame[n / 2]) / 2.0
    })
}

/// Least-squares fit of `F_i = (2i - 1) * dF / 2` over the observed
/// formants (i is the 1-based index): dF = 2 * sum(w_i F_i) / sum(w_i^2)
/// with w_i = 2i - 1.
pub fn formant_spacing(formants: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &f) in formants.iter().enumerate() {
        let w = (2 * i + 1) as f64;
        num += w * f;
        den += w * w;
    }
    if den == 0.0 {
        0.0
    } else {
        2.0 * num / den
    }
}

/// LPC coefficients `a[1..=order]` (with implicit a0 = 1) via Burg's
/// method, the usual choice for formant analysis. Returns `None` for
/// degenerate frames. A mild bandwidth expansion (~15 Hz at 10 kHz) keeps
/// poles off the unit circle so the root finder stays well conditioned.
pub fn burg_lpc(frame: &[f64], order: usize) -> Option<Vec<f64>> {
    let n = frame.len();
    if n <= order + 1 {
        return None;
    }
    let mut fwd = frame.to_vec();
    let mut bwd = frame.to_vec();
    let mut a = vec![0.0f64; order + 1];
    a[0] = 1.0;

    for m in 1..=order {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in m..n {
            num += fwd[i] * bwd[i - 1];
            den += fwd[i] * fwd[i] + bwd[i - 1] * bwd[i - 1];
        }
        if den <= 0.0 {
            return None;
        }
        let k = -2.0 * num / den;
        let prev = a.clone();
        for j in 1..=m {
            a[j] = prev[j] + k * prev[m - j];
        }
        for i in (m..n).rev() {
            let f = fwd[i];
            fwd[i] = f + k * bwd[i - 1];
            bwd[i] = bwd[i - 1] + k * f;
        }
    }

    let gamma = (-PI * 15.0 / ANALYSIS_RATE_HZ as f64).exp();
    let mut g = 1.0;
    for coeff in a.iter_mut().skip(1) {
        g *= gamma;
        *coeff *= g;
    }
    Some(a[1..].to_vec())
}

/// Formant frequencies from LPC coefficients: angles of the complex roots
/// of `A(z)` inside the unit circle with bandwidth below 400 Hz, sorted
/// ascending.
pub fn formant_frequencies(
    lpc: &[f64],
    sample_rate: f64,
    min_hz: f64,
    max_hz: f64,
) -> Vec<f64> {
    // A(z) = 1 + a1 z^-1 + ... + ap z^-p; roots of the monic polynomial
    // z^p + a1 z^(p-1) + ... + ap.
    let mut coeffs = Vec::with_capacity(lpc.len() + 1);
    coeffs.push(1.0);
    coeffs.extend_from_slice(lpc);

    let mut formants = Vec::new();
    for root in polynomial_roots(&coeffs) {
        if root.im <= 0.0 {
            continue;
        }
        let radius = root.norm();
        if radius >= 1.0 {
            continue;
        }
        let freq = root.arg() * sample_rate / (2.0 * PI);
        let bandwidth = -sample_rate / PI * radius.ln();
        if freq > min_hz && freq < max_hz && bandwidth < MAX_FORMANT_BANDWIDTH_HZ {
            formants.push(freq);
        }
    }
    formants.sort_by(|a, b| a.partial_cmp(b).unwrap());
    formants
}

// Durand-Kerner iteration for the roots of a monic real polynomial given
// by descending-power coefficients [1, c1, ..., cp].
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Vec::new();
    }
    let eval = |z: Complex<f64>| -> Complex<f64> {
        coeffs
            .iter()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
    };

    let seed = Complex::new(0.4, 0.9);
    let mut roots: Vec<Complex<f64>> = (0..degree)
        .map(|k| seed.powu(k as u32 + 1))
        .collect();

    for _ in 0..200 {
        let mut max_step = 0.0f64;
        for i in 0..degree {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..degree {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() < 1e-30 {
                continue;
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            max_step = max_step.max(delta.norm());
        }
        if max_step < 1e-12 {
            break;
        }
    }
    roots
}
