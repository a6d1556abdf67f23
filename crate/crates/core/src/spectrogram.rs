//! Magnitude spectrogram for inspection reports.

use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::{frame_signal, AudioClip, AudioError, WindowKind};

/// dB floor applied to every cell.
pub const DB_FLOOR: f64 = -100.0;

/// Time-frequency magnitude grid in dB.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    times_s: Vec<f64>,
    freqs_hz: Vec<f64>,
    /// `magnitude_db[t][f]`, dimensions times x freqs.
    magnitude_db: Vec<Vec<f64>>,
}

impl Spectrogram {
    pub fn times_s(&self) -> &[f64] {
        &self.times_s
    }

    pub fn freqs_hz(&self) -> &[f64] {
        &self.freqs_hz
    }

    pub fn magnitude_db(&self) -> &[Vec<f64>] {
        &self.magnitude_db
    }

    /// Magnitude averaged over time, one value per frequency bin.
    pub fn time_averaged(&self) -> Vec<f64> {
        let n_t = self.times_s.len() as f64;
        let mut avg = vec![0.0f64; self.freqs_hz.len()];
        for row in &self.magnitude_db {
            for (a, &v) in avg.iter_mut().zip(row) {
                *a += v;
            }
        }
        for a in avg.iter_mut() {
            *a /= n_t;
        }
        avg
    }

    /// Writes the grid as CSV: a header of frequencies, then one row per
    /// frame starting with its time.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "time_s")?;
        for f in &self.freqs_hz {
            write!(w, ",{f:.3}")?;
        }
        writeln!(w)?;
        for (t, row) in self.times_s.iter().zip(&self.magnitude_db) {
            write!(w, "{t:.6}")?;
            for v in row {
                write!(w, ",{v:.2}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Short-time Fourier magnitude spectrogram in dB, floored at -100 dB.
pub fn spectrogram(
    clip: &AudioClip,
    frame_length_s: f64,
    hop_s: f64,
) -> Result<Spectrogram, AudioError> {
    let frames = frame_signal(clip, frame_length_s, hop_s, WindowKind::Hanning)?;
    let frame_len = frames.frame_length_samples();
    let fft_len = frame_len.next_power_of_two();
    let rate = clip.sample_rate_hz() as f64;

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(fft_len);

    // Full-scale sine amplitude maps to about 0 dB.
    let window_sum: f64 = WindowKind::Hanning.coefficients(frame_len).iter().sum();
    let scale = 2.0 / window_sum;

    let n_bins = fft_len / 2 + 1;
    let freqs_hz: Vec<f64> = (0..n_bins).map(|k| k as f64 * rate / fft_len as f64).collect();

    let mut times_s = Vec::with_capacity(frames.num_frames());
    let mut magnitude_db = Vec::with_capacity(frames.num_frames());
    let mut buf = vec![Complex::new(0.0f64, 0.0); fft_len];

    for (k, frame) in frames.frames().iter().enumerate() {
        times_s.push(frames.frame_center_s(k));
        for c in buf.iter_mut() {
            *c = Complex::new(0.0, 0.0);
        }
        for (c, &s) in buf.iter_mut().zip(frame) {
            c.re = s;
        }
        fft.process(&mut buf);
        let row: Vec<f64> = buf[..n_bins]
            .iter()
            .map(|c| {
                let mag = c.norm() * scale;
                (20.0 * mag.log10()).max(DB_FLOOR)
            })
            .collect();
        magnitude_db.push(row);
    }

    Ok(Spectrogram {
        times_s,
        freqs_hz,
        magnitude_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::{synthesize, SignalKind, SignalSpec};

    fn sine(freq: f64) -> AudioClip {
        synthesize(&SignalSpec {
            kind: SignalKind::HarmonicComplex { harmonics: 1 },
            f0_hz: freq,
            duration_s: 1.0,
            sample_rate_hz: 44_100,
            amplitude: 0.8,
        })
        .unwrap()
    }

    #[test]
    fn sine_peak_lands_on_its_bin() {
        let spec = spectrogram(&sine(440.0), 0.05, 0.02).unwrap();
        let avg = spec.time_averaged();
        let peak = (0..avg.len())
            .max_by(|&a, &b| avg[a].partial_cmp(&avg[b]).unwrap())
            .unwrap();
        let bin_hz = spec.freqs_hz()[1];
        let peak_hz = spec.freqs_hz()[peak];
        assert!(
            (peak_hz - 440.0).abs() <= bin_hz,
            "peak {peak_hz} Hz, bin width {bin_hz}"
        );
    }

    #[test]
    fn silence_sits_on_the_floor() {
        let clip = synthesize(&SignalSpec {
            kind: SignalKind::Silence,
            f0_hz: 0.0,
            duration_s: 0.3,
            sample_rate_hz: 16_000,
            amplitude: 0.0,
        })
        .unwrap();
        let spec = spectrogram(&clip, 0.04, 0.02).unwrap();
        for row in spec.magnitude_db() {
            assert!(row.iter().all(|&v| v == DB_FLOOR));
        }
    }

    #[test]
    fn two_tones_give_two_local_maxima() {
        let rate = 44_100;
        let n = rate as usize;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / rate as f64;
                0.4 * (2.0 * std::f64::consts::PI * 300.0 * t).sin()
                    + 0.4 * (2.0 * std::f64::consts::PI * 900.0 * t).sin()
            })
            .collect();
        let clip = AudioClip::from_samples(samples, rate).unwrap();
        let spec = spectrogram(&clip, 0.05, 0.02).unwrap();
        let avg = spec.time_averaged();
        let bin_hz = spec.freqs_hz()[1];

        let mut maxima: Vec<(f64, f64)> = Vec::new();
        for i in 1..avg.len() - 1 {
            if avg[i] > avg[i - 1] && avg[i] > avg[i + 1] {
                maxima.push((avg[i], spec.freqs_hz()[i]));
            }
        }
        maxima.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut top: Vec<f64> = maxima.iter().take(2).map(|&(_, f)| f).collect();
        top.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((top[0] - 300.0).abs() <= bin_hz, "first peak {}", top[0]);
        assert!((top[1] - 900.0).abs() <= bin_hz, "second peak {}", top[1]);
    }

    #[test]
    fn csv_grid_has_consistent_dimensions() {
        let spec = spectrogram(&sine(440.0), 0.05, 0.05).unwrap();
        let mut out = Vec::new();
        spec.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        let header_cols = lines.next().unwrap().split(',').count();
        assert_eq!(header_cols, spec.freqs_hz().len() + 1);
        assert_eq!(lines.count(), spec.times_s().len());
    }
}
