//! Synthetic voiced signals and controlled degradations.
//!
//! Generates ground-truth test material: periodic signals whose f0,
//! harmonicity and formant structure are known by construction, plus
//! degradations that mimic the two broad synthesis failure classes -
//! source mismatch (pitch shifts) and loss of harmonic clarity (noise,
//! smearing). Everything is deterministic given the seed, which is what
//! lets corpora stand in for human-labeled audio.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{resample, AudioClip};
use crate::classifier::Quality;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid signal or degradation spec: {0}")]
    InvalidSpec(String),
}

/// What to synthesize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SignalKind {
    /// Sum of the first `harmonics` partials with 1/k amplitudes.
    HarmonicComplex { harmonics: usize },
    /// Band-limited sawtooth (all partials below Nyquist).
    Sawtooth,
    /// Glottal pulse train through cascaded resonators at the given
    /// formant frequencies.
    Vowel { formants_hz: Vec<f64> },
    /// Seeded white noise.
    Noise { seed: u64 },
    Silence,
}

/// A synthetic test signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    #[serde(flatten)]
    pub kind: SignalKind,
    /// Fundamental frequency; ignored for noise and silence.
    pub f0_hz: f64,
    pub duration_s: f64,
    pub sample_rate_hz: u32,
    /// Peak amplitude in (0, 1]; ignored for silence.
    pub amplitude: f64,
}

impl SignalSpec {
    fn validate(&self) -> Result<(), LabError> {
        if !(self.duration_s > 0.0) {
            return Err(LabError::InvalidSpec("duration_s must be positive".into()));
        }
        if self.sample_rate_hz == 0 {
            return Err(LabError::InvalidSpec("sample_rate_hz must be positive".into()));
        }
        let nyquist = self.sample_rate_hz as f64 / 2.0;
        let periodic = !matches!(self.kind, SignalKind::Noise { .. } | SignalKind::Silence);
        if periodic {
            if !(self.f0_hz > 0.0 && self.f0_hz < nyquist) {
                return Err(LabError::InvalidSpec(format!(
                    "f0_hz {} outside (0, {nyquist})",
                    self.f0_hz
                )));
            }
            if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
                return Err(LabError::InvalidSpec("amplitude must be in (0, 1]".into()));
            }
        }
        match &self.kind {
            SignalKind::HarmonicComplex { harmonics } => {
                if *harmonics == 0 {
                    return Err(LabError::InvalidSpec("harmonics must be >= 1".into()));
                }
                if self.f0_hz * *harmonics as f64 >= nyquist {
                    return Err(LabError::InvalidSpec(format!(
                        "harmonic {} of {} Hz exceeds Nyquist",
                        harmonics, self.f0_hz
                    )));
                }
            }
            SignalKind::Vowel { formants_hz } => {
                if formants_hz.is_empty() {
                    return Err(LabError::InvalidSpec("vowel needs formants".into()));
                }
                if formants_hz.iter().any(|&f| !(f > 0.0 && f < nyquist)) {
                    return Err(LabError::InvalidSpec(
                        "formants must lie in (0, Nyquist)".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Renders a spec to audio. Deterministic for a fixed spec (noise carries
/// its own seed).
pub fn synthesize(spec: &SignalSpec) -> Result<AudioClip, LabError> {
    spec.validate()?;
    let rate = spec.sample_rate_hz as f64;
    let n = (spec.duration_s * rate).round().max(1.0) as usize;

    let samples = match &spec.kind {
        SignalKind::Silence => vec![0.0; n],
        SignalKind::Noise { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n)
                .map(|_| spec.amplitude.abs().min(1.0) * (rng.gen::<f64>() * 2.0 - 1.0))
                .collect()
        }
        SignalKind::HarmonicComplex { harmonics } => {
            peak_normalized(additive_partials(n, rate, spec.f0_hz, *harmonics), spec.amplitude)
        }
        SignalKind::Sawtooth => {
            let harmonics = ((rate / 2.0 * 0.95) / spec.f0_hz).floor().max(1.0) as usize;
            peak_normalized(additive_partials(n, rate, spec.f0_hz, harmonics), spec.amplitude)
        }
        SignalKind::Vowel { formants_hz } => {
            peak_normalized(vowel_waveform(n, rate, spec.f0_hz, formants_hz), spec.amplitude)
        }
    };

    AudioClip::from_samples(samples, spec.sample_rate_hz)
        .map_err(|e| LabError::InvalidSpec(e.to_string()))
}

fn additive_partials(n: usize, rate: f64, f0: f64, harmonics: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            (1..=harmonics)
                .map(|k| (2.0 * PI * k as f64 * f0 * t).sin() / k as f64)
                .sum()
        })
        .collect()
}

// Impulse train at f0, leaky-integrated for a -6 dB/oct source slope, then
// passed through one two-pole resonator per formant (100 Hz bandwidths).
fn vowel_waveform(n: usize, rate: f64, f0: f64, formants: &[f64]) -> Vec<f64> {
    let period = rate / f0;
    let mut source = vec![0.0f64; n];
    let mut next_pulse = 0.0f64;
    for (i, s) in source.iter_mut().enumerate() {
        if i as f64 >= next_pulse {
            *s = 1.0;
            next_pulse += period;
        }
    }
    let mut integrated = 0.0;
    for s in source.iter_mut() {
        integrated = *s + 0.98 * integrated;
        *s = integrated;
    }
    // Remove the integrator's slow drift.
    let mean = source.iter().sum::<f64>() / n as f64;
    for s in source.iter_mut() {
        *s -= mean;
    }

    let mut signal = source;
    for &formant in formants {
        let bandwidth = 100.0;
        let r = (-PI * bandwidth / rate).exp();
        let a1 = 2.0 * r * (2.0 * PI * formant / rate).cos();
        let a2 = -r * r;
        let mut y1 = 0.0;
        let mut y2 = 0.0;
        for s in signal.iter_mut() {
            let y = *s + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = y;
            *s = y;
        }
    }
    signal
}

fn peak_normalized(mut samples: Vec<f64>, amplitude: f64) -> Vec<f64> {
    let peak = samples.iter().fold(0.0f64, |m, &s| m.max(s.abs()));
    if peak > 0.0 {
        let gain = amplitude / peak;
        for s in samples.iter_mut() {
            *s *= gain;
        }
    }
    samples
}

/// How to degrade a clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DegradationKind {
    /// Resample-and-relabel: periodicity (and duration) scale by `factor`.
    PitchShift { factor: f64 },
    /// White noise mixed at an exact clip-RMS-relative SNR.
    AddNoise { snr_db: f64 },
    /// Zeroes random 50 ms blocks with the given probability.
    VoicingDropout { fraction: f64 },
    /// Convolution with a short noise burst of roughly `1 / bandwidth_hz`
    /// seconds, diffusing harmonic structure.
    HarmonicSmear { bandwidth_hz: f64 },
    None,
}

/// A degradation plus the seed for any stochastic element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationSpec {
    #[serde(flatten)]
    pub kind: DegradationKind,
    pub seed: u64,
}

const DROPOUT_BLOCK_S: f64 = 0.05;

/// Applies a degradation. Deterministic for fixed clip and spec.
pub fn degrade(clip: &AudioClip, spec: &DegradationSpec) -> Result<AudioClip, LabError> {
    let rate = clip.sample_rate_hz();
    match &spec.kind {
        DegradationKind::None => Ok(clip.clone()),
        DegradationKind::PitchShift { factor } => {
            if !(*factor > 0.0) {
                return Err(LabError::InvalidSpec("pitch factor must be positive".into()));
            }
            let target = ((rate as f64 / factor).round() as u32).max(1);
            let shifted = resample(clip, target)
                .map_err(|e| LabError::InvalidSpec(e.to_string()))?;
            // Relabel at the original rate: playback speeds up by `factor`,
            // scaling every periodicity with it.
            AudioClip::from_samples(shifted.samples().to_vec(), rate)
                .map_err(|e| LabError::InvalidSpec(e.to_string()))
        }
        DegradationKind::AddNoise { snr_db } => {
            let signal_rms = clip.rms();
            if signal_rms <= 0.0 {
                return Ok(clip.clone());
            }
            let target_rms = signal_rms / 10f64.powf(snr_db / 20.0);
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut noise: Vec<f64> = (0..clip.len())
                .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
                .collect();
            let mean = noise.iter().sum::<f64>() / noise.len() as f64;
            for v in noise.iter_mut() {
                *v -= mean;
            }
            let rms = (noise.iter().map(|&v| v * v).sum::<f64>() / noise.len() as f64).sqrt();
            let gain = if rms > 0.0 { target_rms / rms } else { 0.0 };
            let mut out: Vec<f64> = clip
                .samples()
                .iter()
                .zip(&noise)
                .map(|(&s, &v)| s + gain * v)
                .collect();
            rescale_into_range(&mut out);
            AudioClip::from_samples(out, rate).map_err(|e| LabError::InvalidSpec(e.to_string()))
        }
        DegradationKind::VoicingDropout { fraction } => {
            if !(0.0..=1.0).contains(fraction) {
                return Err(LabError::InvalidSpec("dropout fraction outside [0, 1]".into()));
            }
            let block = ((DROPOUT_BLOCK_S * rate as f64).round() as usize).max(1);
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut out = clip.samples().to_vec();
            for chunk in out.chunks_mut(block) {
                if rng.gen::<f64>() < *fraction {
                    chunk.fill(0.0);
                }
            }
            AudioClip::from_samples(out, rate).map_err(|e| LabError::InvalidSpec(e.to_string()))
        }
        DegradationKind::HarmonicSmear { bandwidth_hz } => {
            if !(*bandwidth_hz > 0.0) {
                return Err(LabError::InvalidSpec("smear bandwidth must be positive".into()));
            }
            let burst_len = ((rate as f64 / bandwidth_hz).round() as usize).clamp(2, clip.len());
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let burst: Vec<f64> = (0..burst_len)
                .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
                .collect();
            let x = clip.samples();
            let mut out = vec![0.0f64; x.len()];
            for (i, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, &h) in burst.iter().enumerate() {
                    if i >= j {
                        acc += h * x[i - j];
                    }
                }
                *o = acc;
            }
            // Keep the overall level comparable to the input.
            let in_rms = clip.rms();
            let out_rms = (out.iter().map(|&v| v * v).sum::<f64>() / out.len() as f64).sqrt();
            if out_rms > 0.0 {
                let gain = in_rms / out_rms;
                for v in out.iter_mut() {
                    *v *= gain;
                }
            }
            rescale_into_range(&mut out);
            AudioClip::from_samples(out, rate).map_err(|e| LabError::InvalidSpec(e.to_string()))
        }
    }
}

// Uniform gain keeps SNR and periodicity intact while restoring the
// [-1, 1] amplitude invariant.
fn rescale_into_range(samples: &mut [f64]) {
    let peak = samples.iter().fold(0.0f64, |m, &s| m.max(s.abs()));
    if peak > 1.0 {
        for s in samples.iter_mut() {
            *s /= peak;
        }
    }
}

/// Named corpus constructions used for end-to-end verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusRecipe {
    /// Bad outputs get strong upward pitch shifts; harmonicity is left
    /// intact, so only the f0 classifier can separate the classes.
    PitchShiftOnly,
    /// Bad outputs get heavy additive noise at preserved pitch, so only
    /// the HNR classifier can separate the classes.
    NoiseOnly,
    /// Half the bad outputs are pitch-shifted and half are noised;
    /// catching both requires combining the two classifiers.
    Mixed,
}

/// One generated pair: a clean input and a (possibly degraded) output,
/// labeled by construction.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub input: AudioClip,
    pub output: AudioClip,
    pub label: Quality,
}

const CORPUS_RATE_HZ: u32 = 16_000;
const CORPUS_DURATION_S: f64 = 1.0;

/// Builds a labeled synthetic corpus, fully reproducible from the seed.
///
/// Good outputs are lightly perturbed copies of the input (deviations well
/// inside any plausible acceptance band); bad outputs get the recipe's
/// strong degradation. Both classes share the same mild noise floor so a
/// feature untouched by the recipe cannot separate them.
pub fn build_corpus(
    n_good: usize,
    n_bad: usize,
    recipe: CorpusRecipe,
    seed: u64,
) -> Result<Vec<CorpusEntry>, LabError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(n_good + n_bad);

    for i in 0..n_good + n_bad {
        let is_good = i < n_good;
        let f0 = rng.gen_range(120.0..280.0);
        let harmonics = rng.gen_range(8..=14);
        let amplitude = rng.gen_range(0.35..0.6);
        let input = synthesize(&SignalSpec {
            kind: SignalKind::HarmonicComplex { harmonics },
            f0_hz: f0,
            duration_s: CORPUS_DURATION_S,
            sample_rate_hz: CORPUS_RATE_HZ,
            amplitude,
        })?;

        let (shift, snr_db) = draw_degradation(recipe, is_good, i, &mut rng);
        let mut output = degrade(
            &input,
            &DegradationSpec {
                kind: DegradationKind::PitchShift { factor: shift },
                seed: rng.gen(),
            },
        )?;
        if let Some(snr) = snr_db {
            output = degrade(
                &output,
                &DegradationSpec {
                    kind: DegradationKind::AddNoise { snr_db: snr },
                    seed: rng.gen(),
                },
            )?;
        }

        let (label, prefix) = if is_good {
            (Quality::Good, "good")
        } else {
            (Quality::Bad, "bad")
        };
        let index = if is_good { i } else { i - n_good };
        entries.push(CorpusEntry {
            id: format!("{prefix}_{index:04}"),
            input,
            output,
            label,
        });
    }
    Ok(entries)
}

// Draws (pitch-shift factor, optional SNR) for one output. Whatever the
// recipe does not target is drawn from the same distribution for good and
// bad samples, so only the targeted feature can separate the classes.
fn draw_degradation(
    recipe: CorpusRecipe,
    is_good: bool,
    index: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, Option<f64>) {
    let benign_shift = |rng: &mut ChaCha8Rng| rng.gen_range(0.99..1.01);
    let strong_shift = |rng: &mut ChaCha8Rng| rng.gen_range(1.45..1.8);
    match recipe {
        CorpusRecipe::PitchShiftOnly => {
            let shift = if is_good {
                benign_shift(rng)
            } else {
                strong_shift(rng)
            };
            (shift, Some(rng.gen_range(25.0..30.0)))
        }
        CorpusRecipe::NoiseOnly => {
            let shift = benign_shift(rng);
            let snr = if is_good {
                rng.gen_range(35.0..45.0)
            } else {
                rng.gen_range(3.0..8.0)
            };
            (shift, Some(snr))
        }
        CorpusRecipe::Mixed => {
            if is_good {
                (benign_shift(rng), Some(rng.gen_range(30.0..40.0)))
            } else if index.is_multiple_of(2) {
                (strong_shift(rng), Some(rng.gen_range(30.0..40.0)))
            } else {
                (benign_shift(rng), Some(rng.gen_range(3.0..8.0)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AnalysisConfig;
    use crate::hnr::mean_hnr;
    use crate::pitch::track_pitch;

    fn complex(f0: f64) -> AudioClip {
        synthesize(&SignalSpec {
            kind: SignalKind::HarmonicComplex { harmonics: 10 },
            f0_hz: f0,
            duration_s: 1.0,
            sample_rate_hz: 16_000,
            amplitude: 0.5,
        })
        .unwrap()
    }

    fn median_f0_of(clip: &AudioClip) -> f64 {
        let track = track_pitch(clip, &AnalysisConfig::default()).unwrap();
        crate::features::median_f0(&track).unwrap()
    }

    #[test]
    fn complex_tracks_at_generator_frequency() {
        let f0 = median_f0_of(&complex(200.0));
        assert!((f0 - 200.0).abs() <= 2.0, "median f0 {f0}");
    }

    #[test]
    fn silence_is_all_zeros() {
        let clip = synthesize(&SignalSpec {
            kind: SignalKind::Silence,
            f0_hz: 0.0,
            duration_s: 0.3,
            sample_rate_hz: 8_000,
            amplitude: 0.0,
        })
        .unwrap();
        assert!(clip.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn invalid_specs_rejected() {
        let base = SignalSpec {
            kind: SignalKind::Sawtooth,
            f0_hz: 220.0,
            duration_s: 1.0,
            sample_rate_hz: 16_000,
            amplitude: 0.5,
        };
        let above_nyquist = SignalSpec {
            f0_hz: 9_000.0,
            ..base.clone()
        };
        assert!(synthesize(&above_nyquist).is_err());
        let zero_duration = SignalSpec {
            duration_s: 0.0,
            ..base
        };
        assert!(synthesize(&zero_duration).is_err());
    }

    #[test]
    fn none_degradation_is_identity() {
        let clip = complex(220.0);
        let out = degrade(
            &clip,
            &DegradationSpec {
                kind: DegradationKind::None,
                seed: 0,
            },
        )
        .unwrap();
        assert_eq!(out.samples(), clip.samples());
    }

    #[test]
    fn pitch_shift_scales_median_f0() {
        let clip = complex(200.0);
        let shifted = degrade(
            &clip,
            &DegradationSpec {
                kind: DegradationKind::PitchShift { factor: 1.5 },
                seed: 0,
            },
        )
        .unwrap();
        let f0 = median_f0_of(&shifted);
        assert!((f0 - 300.0).abs() <= 3.0, "shifted f0 {f0}");
    }

    #[test]
    fn zero_db_noise_floors_hnr() {
        let clip = complex(200.0);
        let cfg = AnalysisConfig::default();
        let clean_hnr = mean_hnr(&clip, &cfg).unwrap();
        let noisy = degrade(
            &clip,
            &DegradationSpec {
                kind: DegradationKind::AddNoise { snr_db: 0.0 },
                seed: 5,
            },
        )
        .unwrap();
        let noisy_hnr = mean_hnr(&noisy, &cfg).unwrap();
        assert!(
            clean_hnr - noisy_hnr >= 8.0,
            "HNR only dropped from {clean_hnr} to {noisy_hnr}"
        );
    }

    #[test]
    fn dropout_zeroes_roughly_the_requested_fraction() {
        let clip = complex(200.0);
        let out = degrade(
            &clip,
            &DegradationSpec {
                kind: DegradationKind::VoicingDropout { fraction: 0.4 },
                seed: 21,
            },
        )
        .unwrap();
        let block = (0.05 * 16_000.0) as usize;
        let zeroed = out
            .samples()
            .chunks(block)
            .filter(|c| c.iter().all(|&s| s == 0.0))
            .count();
        let total = out.samples().chunks(block).count();
        let fraction = zeroed as f64 / total as f64;
        assert!(
            (0.2..=0.6).contains(&fraction),
            "zeroed {zeroed}/{total} blocks"
        );
    }

    #[test]
    fn harmonic_smear_reshapes_but_preserves_level() {
        // Convolution keeps a stationary signal periodic, so HNR moves
        // only slightly; the observable effects are a new waveform shape
        // at the same level and duration.
        let clip = complex(200.0);
        let cfg = AnalysisConfig::default();
        let clean = mean_hnr(&clip, &cfg).unwrap();
        let smeared = degrade(
            &clip,
            &DegradationSpec {
                kind: DegradationKind::HarmonicSmear { bandwidth_hz: 30.0 },
                seed: 4,
            },
        )
        .unwrap();
        assert_eq!(smeared.len(), clip.len());
        assert_ne!(smeared.samples(), clip.samples());
        assert!((smeared.rms() - clip.rms()).abs() <= 0.05 * clip.rms());
        let after = mean_hnr(&smeared, &cfg).unwrap();
        assert!(
            after <= clean && clean - after >= 0.5,
            "expected a mild harmonicity dent, got {clean} -> {after}"
        );
    }

    #[test]
    fn degradations_are_seed_deterministic() {
        let clip = complex(180.0);
        for kind in [
            DegradationKind::AddNoise { snr_db: 10.0 },
            DegradationKind::VoicingDropout { fraction: 0.3 },
            DegradationKind::HarmonicSmear { bandwidth_hz: 50.0 },
        ] {
            let spec = DegradationSpec {
                kind: kind.clone(),
                seed: 77,
            };
            let a = degrade(&clip, &spec).unwrap();
            let b = degrade(&clip, &spec).unwrap();
            assert_eq!(a.samples(), b.samples(), "{kind:?} not deterministic");
        }
    }

    #[test]
    fn corpus_is_seed_deterministic() {
        let a = build_corpus(3, 3, CorpusRecipe::Mixed, 7).unwrap();
        let b = build_corpus(3, 3, CorpusRecipe::Mixed, 7).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.id, y.id);
            assert_eq!(x.label, y.label);
            assert_eq!(x.input.samples(), y.input.samples());
            assert_eq!(x.output.samples(), y.output.samples());
        }
    }

    #[test]
    fn empty_corpus_is_allowed() {
        let entries = build_corpus(0, 0, CorpusRecipe::NoiseOnly, 1).unwrap();
        assert!(entries.is_empty());
    }
}
