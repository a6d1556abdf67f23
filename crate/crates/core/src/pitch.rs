//! Fundamental frequency tracking.
//!
//! Autocorrelation pitch analysis in the style of Boersma (1993): the
//! windowed frame's autocorrelation is divided by the window's own
//! autocorrelation, candidate peaks are collected per frame, and a
//! Viterbi pass with an octave-jump cost picks the final path. Voicing is
//! decided per frame by a peak-strength threshold plus a silence gate.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::{AudioClip, WindowKind};
use crate::config::AnalysisConfig;
use crate::features::FeatureError;

/// Marker value for unvoiced frames in [`PitchTrack::f0_hz`].
pub const UNVOICED: f64 = 0.0;

/// Per-frame pitch contour with voicing strengths.
#[derive(Debug, Clone)]
pub struct PitchTrack {
    times_s: Vec<f64>,
    f0_hz: Vec<f64>,
    voicing_strength: Vec<f64>,
}

impl PitchTrack {
    /// Assembles a track from precomputed frames (mostly for tests and
    /// fixtures). Panics if the vectors disagree in length.
    pub fn from_raw(times_s: Vec<f64>, f0_hz: Vec<f64>, voicing_strength: Vec<f64>) -> Self {
        assert_eq!(times_s.len(), f0_hz.len());
        assert_eq!(times_s.len(), voicing_strength.len());
        Self {
            times_s,
            f0_hz,
            voicing_strength,
        }
    }

    pub fn times_s(&self) -> &[f64] {
        &self.times_s
    }

    /// Per-frame f0 in Hz; [`UNVOICED`] (0.0) marks unvoiced frames.
    pub fn f0_hz(&self) -> &[f64] {
        &self.f0_hz
    }

    /// Normalized autocorrelation strength of the selected candidate, in [0, 1].
    pub fn voicing_strength(&self) -> &[f64] {
        &self.voicing_strength
    }

    pub fn num_frames(&self) -> usize {
        self.f0_hz.len()
    }

    pub fn is_voiced(&self, frame: usize) -> bool {
        self.f0_hz[frame] > 0.0
    }

    pub fn voiced_frame_count(&self) -> usize {
        self.f0_hz.iter().filter(|&&f| f > 0.0).count()
    }

    /// f0 values of voiced frames only.
    pub fn voiced_values(&self) -> Vec<f64> {
        self.f0_hz.iter().copied().filter(|&f| f > 0.0).collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    freq_hz: f64,
    /// Raw normalized autocorrelation at the peak.
    strength: f64,
    /// Strength with the octave-cost bias applied; used for path search.
    adjusted: f64,
}

const MAX_CANDIDATES: usize = 6;

/// Tracks pitch over the whole clip.
///
/// The clip must be at least one analysis window (`3 / pitch_floor_hz`
/// seconds) long.
pub fn track_pitch(clip: &AudioClip, cfg: &AnalysisConfig) -> Result<PitchTrack, FeatureError> {
    let rate = clip.sample_rate_hz() as f64;
    let window_s = cfg.pitch_window_s();
    if clip.duration_s() < window_s {
        return Err(FeatureError::ClipTooShort {
            required_s: window_s,
            actual_s: clip.duration_s(),
        });
    }

    let window_len = (window_s * rate).round() as usize;
    let hop = ((cfg.frame_hop_s * rate).round() as usize).max(1);
    let n_frames = (clip.len() - window_len) / hop + 1;

    let min_lag = (rate / cfg.pitch_ceiling_hz).ceil().max(2.0) as usize;
    let max_lag = ((rate / cfg.pitch_floor_hz).floor() as usize).min(window_len - 1);

    let window = WindowKind::Hanning.coefficients(window_len);
    let window_ac = autocorrelation(&window, max_lag, &mut AcScratch::new(window_len, max_lag));

    let samples = clip.samples();
    let mut scratch = AcScratch::new(window_len, max_lag);

    // Silence gate works on raw frame RMS relative to the loudest frame.
    let frame_rms: Vec<f64> = (0..n_frames)
        .map(|k| {
            let start = k * hop;
            let frame = &samples[start..start + window_len];
            let e: f64 = frame.iter().map(|&s| s * s).sum();
            (e / window_len as f64).sqrt()
        })
        .collect();
    let peak_rms = frame_rms.iter().fold(0.0f64, |m, &r| m.max(r));

    let mut times = Vec::with_capacity(n_frames);
    let mut all_candidates: Vec<Vec<Candidate>> = Vec::with_capacity(n_frames);
    let mut buf = vec![0.0f64; window_len];

    for k in 0..n_frames {
        let start = k * hop;
        times.push((start as f64 + (window_len as f64 - 1.0) / 2.0) / rate);

        let silent = peak_rms <= 0.0 || frame_rms[k] < cfg.silence_threshold * peak_rms;
        if silent {
            all_candidates.push(Vec::new());
            continue;
        }

        let frame = &samples[start..start + window_len];
        let mean = frame.iter().sum::<f64>() / window_len as f64;
        for (b, (&s, &w)) in buf.iter_mut().zip(frame.iter().zip(&window)) {
            *b = (s - mean) * w;
        }

        let ac = autocorrelation(&buf, max_lag, &mut scratch);
        let candidates = find_peaks(&ac, &window_ac, min_lag, max_lag, rate, cfg);
        all_candidates.push(candidates);
    }

    // A frame is voiced iff its best raw peak clears the voicing threshold;
    // the silence gate has already emptied silent frames.
    let voiced: Vec<bool> = all_candidates
        .iter()
        .map(|cands| {
            cands
                .iter()
                .any(|c| c.strength >= cfg.voicing_threshold)
        })
        .collect();
    for (cands, &v) in all_candidates.iter_mut().zip(&voiced) {
        if !v {
            cands.clear();
        } else {
            cands.retain(|c| c.strength >= cfg.voicing_threshold);
        }
    }

    let selected = smooth_path(&all_candidates, cfg);

    let mut f0 = vec![UNVOICED; n_frames];
    let mut strength = vec![0.0f64; n_frames];
    for (k, sel) in selected.into_iter().enumerate() {
        if let Some(c) = sel {
            f0[k] = c.freq_hz.clamp(cfg.pitch_floor_hz, cfg.pitch_ceiling_hz);
            strength[k] = c.strength.clamp(0.0, 1.0);
        }
    }

    Ok(PitchTrack {
        times_s: times,
        f0_hz: f0,
        voicing_strength: strength,
    })
}

struct AcScratch {
    fft_len: usize,
    buf: Vec<Complex<f64>>,
    planner: FftPlanner<f64>,
}

impl AcScratch {
    fn new(frame_len: usize, max_lag: usize) -> Self {
        let fft_len = (frame_len + max_lag + 1).next_power_of_two();
        Self {
            fft_len,
            buf: vec![Complex::new(0.0, 0.0); fft_len],
            planner: FftPlanner::new(),
        }
    }
}

// FFT autocorrelation: r[tau] = sum_i x[i] x[i+tau] for tau in 0..=max_lag.
fn autocorrelation(x: &[f64], max_lag: usize, scratch: &mut AcScratch) -> Vec<f64> {
    let n = scratch.fft_len;
    let buf = &mut scratch.buf;
    for c in buf.iter_mut() {
        *c = Complex::new(0.0, 0.0);
    }
    for (c, &v) in buf.iter_mut().zip(x) {
        c.re = v;
    }
    let fwd = scratch.planner.plan_fft_forward(n);
    fwd.process(buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    let inv = scratch.planner.plan_fft_inverse(n);
    inv.process(buf);
    let scale = 1.0 / n as f64;
    buf[..=max_lag].iter().map(|c| c.re * scale).collect()
}

fn find_peaks(
    ac: &[f64],
    window_ac: &[f64],
    min_lag: usize,
    max_lag: usize,
    rate: f64,
    cfg: &AnalysisConfig,
) -> Vec<Candidate> {
    let r0 = ac[0];
    if r0 <= 1e-30 {
        return Vec::new();
    }

    // Boersma's window normalization: r(tau) = (r_x(tau)/r_x(0)) / (r_w(tau)/r_w(0)).
    let w0 = window_ac[0];
    let mut norm = vec![0.0f64; max_lag + 1];
    for lag in 0..=max_lag {
        if window_ac[lag] > 1e-12 * w0 {
            norm[lag] = (ac[lag] / r0) / (window_ac[lag] / w0);
        }
    }

    let mut out: Vec<Candidate> = Vec::new();
    for lag in min_lag..max_lag {
        if norm[lag] > norm[lag - 1] && norm[lag] >= norm[lag + 1] {
            let (prev, here, next) = (norm[lag - 1], norm[lag], norm[lag + 1]);
            let denom = prev - 2.0 * here + next;
            let (refined_lag, refined_r) = if denom.abs() > 1e-12 {
                let delta = 0.5 * (prev - next) / denom;
                if delta.abs() < 1.0 {
                    (lag as f64 + delta, here - 0.25 * (prev - next) * delta)
                } else {
                    (lag as f64, here)
                }
            } else {
                (lag as f64, here)
            };
            let freq = rate / refined_lag;
            let strength = refined_r.min(1.0);
            // Small bias toward higher-frequency peaks counters subharmonic picks.
            let adjusted = strength - cfg.octave_cost * (cfg.pitch_floor_hz / freq).log2();
            out.push(Candidate {
                freq_hz: freq,
                strength,
                adjusted,
            });
        }
    }

    out.sort_by(|a, b| b.adjusted.partial_cmp(&a.adjusted).unwrap());
    out.truncate(MAX_CANDIDATES);
    out
}

// Viterbi over each voiced run: maximize candidate strength minus
// octave-jump costs between consecutive voiced frames. Unvoiced frames
// break the chain.
fn smooth_path(candidates: &[Vec<Candidate>], cfg: &AnalysisConfig) -> Vec<Option<Candidate>> {
    let n = candidates.len();
    let mut selected: Vec<Option<Candidate>> = vec![None; n];
    // Costs are defined per 10 ms of hop, following the usual convention.
    let time_scale = 0.01 / cfg.frame_hop_s;

    let mut k = 0;
    while k < n {
        if candidates[k].is_empty() {
            k += 1;
            continue;
        }
        let run_start = k;
        while k < n && !candidates[k].is_empty() {
            k += 1;
        }
        let run = &candidates[run_start..k];

        let mut score: Vec<Vec<f64>> = run
            .iter()
            .map(|c| c.iter().map(|cand| cand.adjusted).collect())
            .collect();
        let mut back: Vec<Vec<usize>> = run.iter().map(|c| vec![0; c.len()]).collect();

        for i in 1..run.len() {
            for j in 0..run[i].len() {
                let mut best = f64::NEG_INFINITY;
                let mut best_prev = 0;
                for (p, prev_cand) in run[i - 1].iter().enumerate() {
                    let jump = (run[i][j].freq_hz / prev_cand.freq_hz).log2().abs();
                    let total = score[i - 1][p] - cfg.octave_jump_cost * time_scale * jump;
                    if total > best {
                        best = total;
                        best_prev = p;
                    }
                }
                score[i][j] += best;
                back[i][j] = best_prev;
            }
        }

        let last = run.len() - 1;
        let mut j = (0..run[last].len())
            .max_by(|&a, &b| score[last][a].partial_cmp(&score[last][b]).unwrap())
            .unwrap();
        for i in (0..run.len()).rev() {
            selected[run_start + i] = Some(run[i][j]);
            if i > 0 {
                j = back[i][j];
            }
        }
    }

    selected
}
