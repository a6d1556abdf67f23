//! Audio I/O and framing.
//!
//! Decodes RIFF/WAVE PCM files into a uniform in-memory representation
//! (mono, normalized f64 samples) and provides the short-term framing and
//! band-limited resampling the analysis modules are built on.

use std::path::{Path, PathBuf};

use thiserror::Error;

/// Errors from decoding, framing and resampling.
#[derive(Debug, Error)]
pub enum AudioError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("audio stream contains no samples")]
    EmptyAudio,
    #[error("frame of {frame_samples} samples exceeds signal of {signal_samples} samples")]
    FrameTooLong {
        frame_samples: usize,
        signal_samples: usize,
    },
    #[error("parameter {0} must be positive")]
    NonPositiveParam(&'static str),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// A decoded mono waveform.
///
/// Samples are normalized to `[-1.0, 1.0]` regardless of the bit depth of
/// the source file, so downstream DSP is bit-depth independent. Immutable
/// after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl AudioClip {
    /// Builds a clip from raw samples, clamping any out-of-range values.
    pub fn from_samples(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self, AudioError> {
        if sample_rate_hz == 0 {
            return Err(AudioError::NonPositiveParam("sample_rate_hz"));
        }
        if samples.is_empty() {
            return Err(AudioError::EmptyAudio);
        }
        let samples = samples
            .into_iter()
            .map(|s| if s.is_finite() { s.clamp(-1.0, 1.0) } else { 0.0 })
            .collect();
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Peak absolute amplitude.
    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, &s| m.max(s.abs()))
    }

    /// Root-mean-square amplitude over the whole clip.
    pub fn rms(&self) -> f64 {
        let e: f64 = self.samples.iter().map(|&s| s * s).sum();
        (e / self.samples.len() as f64).sqrt()
    }
}

/// Analysis window shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Rectangular,
    Hanning,
    Gaussian,
}

impl WindowKind {
    /// Window coefficients for a frame of `n` samples.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        if n <= 1 {
            return vec![1.0; n];
        }
        match self {
            WindowKind::Rectangular => vec![1.0; n],
            WindowKind::Hanning => (0..n)
                .map(|i| {
                    0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()
                })
                .collect(),
            WindowKind::Gaussian => {
                let half = (n - 1) as f64 / 2.0;
                let sigma = 0.4 * half;
                (0..n)
                    .map(|i| {
                        let u = (i as f64 - half) / sigma;
                        (-0.5 * u * u).exp()
                    })
                    .collect()
            }
        }
    }
}

/// Windowed frames cut from a clip at a fixed hop.
///
/// Frame `k` starts at sample `k * hop_samples`; a trailing partial frame is
/// discarded rather than zero-padded so frame statistics stay unbiased.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    frames: Vec<Vec<f64>>,
    frame_length_samples: usize,
    hop_samples: usize,
    window_kind: WindowKind,
    sample_rate_hz: u32,
}

impl FrameSequence {
    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn frame_length_samples(&self) -> usize {
        self.frame_length_samples
    }

    pub fn hop_samples(&self) -> usize {
        self.hop_samples
    }

    pub fn window_kind(&self) -> WindowKind {
        self.window_kind
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    /// Time of the center of frame `k`, in seconds.
    pub fn frame_center_s(&self, k: usize) -> f64 {
        let start = k * self.hop_samples;
        (start as f64 + (self.frame_length_samples as f64 - 1.0) / 2.0)
            / self.sample_rate_hz as f64
    }
}

/// Decodes a PCM WAV file (8/16/24/32-bit integer or 32-bit float).
///
/// Multichannel input is mixed down by equal-weight channel averaging and
/// integer samples are scaled to `[-1, 1]` by the type's full-scale divisor.
pub fn decode_wav(path: impl AsRef<Path>) -> Result<AudioClip, AudioError> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(AudioError::FileNotFound(path.to_path_buf()));
    }
    let mut reader = hound::WavReader::open(path).map_err(map_hound_err)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(AudioError::UnsupportedFormat("zero channels".into()));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<Result<_, _>>()
            .map_err(map_hound_err)?,
        (hound::SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let full_scale = (1i64 << (bits - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / full_scale))
                .collect::<Result<_, _>>()
                .map_err(map_hound_err)?
        }
        (fmt, bits) => {
            return Err(AudioError::UnsupportedFormat(format!(
                "{bits}-bit {fmt:?} PCM"
            )))
        }
    };

    if interleaved.is_empty() {
        return Err(AudioError::EmptyAudio);
    }

    let mono = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks(channels)
            .map(|frame| frame.iter().sum::<f64>() / frame.len() as f64)
            .collect()
    };

    AudioClip::from_samples(mono, spec.sample_rate)
}

/// Writes a clip as 16-bit mono PCM WAV.
///
/// Encoding then decoding round-trips 16-bit sample values bit-exactly.
pub fn encode_wav(clip: &AudioClip, path: impl AsRef<Path>) -> Result<(), AudioError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path.as_ref(), spec).map_err(map_hound_err)?;
    for &s in &clip.samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(map_hound_err)?;
    }
    writer.finalize().map_err(map_hound_err)?;
    Ok(())
}

fn map_hound_err(e: hound::Error) -> AudioError {
    match e {
        hound::Error::IoError(io) => AudioError::Io(io),
        other => AudioError::UnsupportedFormat(other.to_string()),
    }
}

/// Cuts a clip into windowed frames.
pub fn frame_signal(
    clip: &AudioClip,
    frame_length_s: f64,
    hop_s: f64,
    window: WindowKind,
) -> Result<FrameSequence, AudioError> {
    if !(frame_length_s > 0.0) {
        return Err(AudioError::NonPositiveParam("frame_length_s"));
    }
    if !(hop_s > 0.0) {
        return Err(AudioError::NonPositiveParam("hop_s"));
    }
    let rate = clip.sample_rate_hz as f64;
    let frame_len = (frame_length_s * rate).round() as usize;
    let hop = (hop_s * rate).round().max(1.0) as usize;
    if frame_len == 0 {
        return Err(AudioError::NonPositiveParam("frame_length_s"));
    }
    if frame_len > clip.len() {
        return Err(AudioError::FrameTooLong {
            frame_samples: frame_len,
            signal_samples: clip.len(),
        });
    }

    let coeffs = window.coefficients(frame_len);
    let n_frames = (clip.len() - frame_len) / hop + 1;
    let mut frames = Vec::with_capacity(n_frames);
    for k in 0..n_frames {
        let start = k * hop;
        let frame: Vec<f64> = clip.samples[start..start + frame_len]
            .iter()
            .zip(&coeffs)
            .map(|(&s, &w)| s * w)
            .collect();
        frames.push(frame);
    }

    Ok(FrameSequence {
        frames,
        frame_length_samples: frame_len,
        hop_samples: hop,
        window_kind: window,
        sample_rate_hz: clip.sample_rate_hz,
    })
}

// Windowed-sinc kernel half-width in zero crossings.
const RESAMPLE_TAPS: isize = 32;

/// Band-limited resampling to `target_rate_hz` (windowed-sinc interpolation).
///
/// Output duration stays within one sample period of the input duration.
pub fn resample(clip: &AudioClip, target_rate_hz: u32) -> Result<AudioClip, AudioError> {
    if target_rate_hz == 0 {
        return Err(AudioError::NonPositiveParam("target_rate_hz"));
    }
    if target_rate_hz == clip.sample_rate_hz {
        return Ok(clip.clone());
    }

    let ratio = target_rate_hz as f64 / clip.sample_rate_hz as f64;
    let out_len = ((clip.len() as f64 * ratio).round() as usize).max(1);
    // Cutoff relative to the input rate; downsampling narrows it for anti-aliasing.
    let cutoff = 0.475 * ratio.min(1.0);
    let x = &clip.samples;
    let n = x.len() as isize;

    let mut out = Vec::with_capacity(out_len);
    for j in 0..out_len {
        let t = j as f64 / ratio;
        let center = t.floor() as isize;
        let mut acc = 0.0;
        for k in (center - RESAMPLE_TAPS + 1)..=(center + RESAMPLE_TAPS) {
            if k < 0 || k >= n {
                continue;
            }
            let u = t - k as f64;
            acc += x[k as usize] * sinc_kernel(u, cutoff);
        }
        out.push(acc.clamp(-1.0, 1.0));
    }

    AudioClip::from_samples(out, target_rate_hz)
}

// Low-pass sinc with a Blackman window over +-RESAMPLE_TAPS samples.
fn sinc_kernel(u: f64, cutoff: f64) -> f64 {
    let taps = RESAMPLE_TAPS as f64;
    if u.abs() >= taps {
        return 0.0;
    }
    let sinc = if u == 0.0 {
        2.0 * cutoff
    } else {
        (2.0 * std::f64::consts::PI * cutoff * u).sin() / (std::f64::consts::PI * u)
    };
    let w = 0.42 + 0.5 * (std::f64::consts::PI * u / taps).cos()
        + 0.08 * (2.0 * std::f64::consts::PI * u / taps).cos();
    sinc * w
}
