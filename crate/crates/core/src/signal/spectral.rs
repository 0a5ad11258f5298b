//! STFT magnitude, HTK mel filterbank, log-mel spectrogram.

use ndarray::{Array2, Axis};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::audio::AudioBuffer;
use super::window::hann_window;
use crate::error::{Error, Result};

/// Floor applied to mel magnitudes before the natural log.
pub const LOG_FLOOR: f32 = 1e-5;

/// Analysis parameters for the mel frontend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelConfig {
    pub sample_rate_hz: u32,
    pub n_fft: usize,
    pub win_length: usize,
    pub hop_length: usize,
    pub n_mels: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
}

impl Default for MelConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 22050,
            n_fft: 1024,
            win_length: 1024,
            hop_length: 256,
            n_mels: 80,
            fmin_hz: 0.0,
            fmax_hz: 8000.0,
        }
    }
}

impl MelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.sample_rate_hz == 0 || self.n_fft == 0 || self.hop_length == 0 || self.n_mels == 0 {
            return bad("sample rate, n_fft, hop_length and n_mels must be positive".into());
        }
        if !(self.hop_length <= self.win_length && self.win_length <= self.n_fft) {
            return bad(format!(
                "need hop_length ({}) <= win_length ({}) <= n_fft ({})",
                self.hop_length, self.win_length, self.n_fft
            ));
        }
        let nyquist = self.sample_rate_hz as f64 / 2.0;
        if !(self.fmin_hz >= 0.0 && self.fmin_hz < self.fmax_hz) {
            return bad(format!(
                "need 0 <= fmin ({}) < fmax ({})",
                self.fmin_hz, self.fmax_hz
            ));
        }
        if self.fmax_hz > nyquist {
            return bad(format!(
                "fmax {} Hz is beyond the Nyquist frequency {nyquist} Hz",
                self.fmax_hz
            ));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    /// Frames produced for a signal of `n_samples` samples.
    pub fn n_frames(&self, n_samples: usize) -> usize {
        1 + n_samples / self.hop_length
    }
}

/// Log-mel spectrogram, shape `(n_mels, n_frames)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    data: Array2<f32>,
    config: MelConfig,
}

impl MelSpectrogram {
    pub fn new(data: Array2<f32>, config: MelConfig) -> Result<Self> {
        if data.nrows() != config.n_mels {
            return Err(Error::Shape(format!(
                "mel data has {} rows but config declares {} mels",
                data.nrows(),
                config.n_mels
            )));
        }
        if data.ncols() == 0 {
            return Err(Error::Shape(
                "mel spectrogram needs at least one frame".into(),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "mel spectrogram has non-finite entries".into(),
            ));
        }
        Ok(Self { data, config })
    }

    pub fn data(&self) -> &Array2<f32> {
        &self.data
    }

    pub fn config(&self) -> &MelConfig {
        &self.config
    }

    pub fn n_mels(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_frames(&self) -> usize {
        self.data.ncols()
    }
}

/// Index into `[0, len)` with symmetric reflection about the end samples
/// (no edge repeat), applied as often as needed.
fn reflect_index(i: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let m = i.rem_euclid(period);
    if m < len as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Center-aligned STFT magnitudes, shape `(n_fft/2 + 1, 1 + len/hop)`.
pub fn stft_magnitude(buffer: &AudioBuffer, config: &MelConfig) -> Result<Array2<f32>> {
    config.validate()?;
    if buffer.is_empty() {
        return Err(Error::Empty("stft input has no samples".into()));
    }
    let x = buffer.samples();
    let n_fft = config.n_fft;
    let n_frames = config.n_frames(x.len());
    let pad = (n_fft / 2) as isize;

    let mut window = vec![0.0f64; n_fft];
    let offset = (n_fft - config.win_length) / 2;
    window[offset..offset + config.win_length].copy_from_slice(&hann_window(config.win_length));

    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_fft);
    let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
    let mut frame = vec![Complex::default(); n_fft];
    let mut out = Array2::<f32>::zeros((config.n_bins(), n_frames));

    for t in 0..n_frames {
        let start = (t * config.hop_length) as isize - pad;
        for (i, slot) in frame.iter_mut().enumerate() {
            let s = x[reflect_index(start + i as isize, x.len())] as f64;
            *slot = Complex::new(s * window[i], 0.0);
        }
        fft.process_with_scratch(&mut frame, &mut scratch);
        for (k, c) in frame.iter().take(config.n_bins()).enumerate() {
            out[[k, t]] = c.norm() as f32;
        }
    }
    Ok(out)
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Band edges in Hz: `n_mels + 2` points equally spaced on the HTK mel scale.
pub fn mel_band_edges(config: &MelConfig) -> Vec<f64> {
    let lo = hz_to_mel(config.fmin_hz);
    let hi = hz_to_mel(config.fmax_hz);
    let step = (hi - lo) / (config.n_mels + 1) as f64;
    (0..config.n_mels + 2)
        .map(|i| mel_to_hz(lo + step * i as f64))
        .collect()
}

/// Triangular HTK-mel filterbank, shape `(n_mels, n_fft/2 + 1)`.
pub fn mel_filterbank(config: &MelConfig) -> Result<Array2<f32>> {
    config.validate()?;
    let edges = mel_band_edges(config);
    let bin_hz = config.sample_rate_hz as f64 / config.n_fft as f64;
    let mut fb = Array2::<f32>::zeros((config.n_mels, config.n_bins()));
    for m in 0..config.n_mels {
        let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
        for k in 0..config.n_bins() {
            let f = k as f64 * bin_hz;
            let rise = (f - lo) / (center - lo);
            let fall = (hi - f) / (hi - center);
            fb[[m, k]] = rise.min(fall).max(0.0) as f32;
        }
        if fb.row(m).iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mel filter {m} covers no FFT bin; use fewer mels or a larger n_fft"
            )));
        }
    }
    Ok(fb)
}

/// `ln(max(filterbank . |STFT|, 1e-5))`.
pub fn mel_spectrogram(buffer: &AudioBuffer, config: &MelConfig) -> Result<MelSpectrogram> {
    if buffer.sample_rate_hz() != config.sample_rate_hz {
        return Err(Error::InvalidArgument(format!(
            "audio is {} Hz but the mel config expects {} Hz",
            buffer.sample_rate_hz(),
            config.sample_rate_hz
        )));
    }
    let mag = stft_magnitude(buffer, config)?;
    let fb = mel_filterbank(config)?;
    let data = fb.dot(&mag).mapv_into(|v| v.max(LOG_FLOOR).ln());
    MelSpectrogram::new(data, config.clone())
}

/// Per-frame index of the largest value along the first axis.
pub fn argmax_per_frame(data: &Array2<f32>) -> Vec<usize> {
    data.axis_iter(Axis(1))
        .map(|col| {
            col.iter()
                .enumerate()
                .fold((0, f32::NEG_INFINITY), |best, (i, &v)| {
                    if v > best.1 {
                        (i, v)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(freq: f64, rate: u32, len: usize, amp: f64) -> AudioBuffer {
        let s = (0..len)
            .map(|n| (amp * (2.0 * PI * freq * n as f64 / rate as f64).sin()) as f32)
            .collect();
        AudioBuffer::new(s, rate).unwrap()
    }

    #[test]
    fn reflect_matches_numpy_convention() {
        // numpy.pad([0,1,2,3], 3, 'reflect') -> [3,2,1,0,1,2,3,2,1,0]
        let got: Vec<usize> = (-3..7).map(|i| reflect_index(i, 4)).collect();
        assert_eq!(got, vec![3, 2, 1, 0, 1, 2, 3, 2, 1, 0]);
        assert_eq!(reflect_index(-5, 1), 0);
    }

    #[test]
    fn sine_peaks_at_expected_bin() {
        let cfg = MelConfig::default();
        let mag = stft_magnitude(&sine(440.0, 22050, 22050, 0.5), &cfg).unwrap();
        let expected = (440.0f64 * 1024.0 / 22050.0).round() as usize;
        assert_eq!(expected, 20);
        // The first and last frames see the reflected signal in half their window.
        let peaks = argmax_per_frame(&mag);
        let interior = &peaks[2..peaks.len() - 2];
        assert!(interior.iter().all(|&k| k == expected), "{peaks:?}");
    }

    #[test]
    fn zero_and_dc_inputs() {
        let cfg = MelConfig::default();
        let zero = AudioBuffer::silence(3000, 22050).unwrap();
        assert!(stft_magnitude(&zero, &cfg)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));

        let dc = AudioBuffer::new(vec![1.0; 5000], 22050).unwrap();
        let mag = stft_magnitude(&dc, &cfg).unwrap();
        assert!(argmax_per_frame(&mag).iter().all(|&k| k == 0));
        let total: f32 = mag.column(5).iter().map(|v| v * v).sum();
        assert!(mag[[0, 5]] * mag[[0, 5]] > 0.5 * total);
    }

    #[test]
    fn stft_rejects_empty() {
        let cfg = MelConfig::default();
        let empty = AudioBuffer::silence(0, 22050).unwrap();
        assert!(stft_magnitude(&empty, &cfg).is_err());
    }

    #[test]
    fn filterbank_rows_are_nonempty_unimodal_triangles() {
        let cfg = MelConfig::default();
        let fb = mel_filterbank(&cfg).unwrap();
        assert_eq!(fb.dim(), (80, 513));
        let mut prev_support = (0usize, 0usize);
        for row in fb.rows() {
            assert!(row.sum() > 0.0);
            assert!(row.iter().all(|&v| v >= 0.0));
            let peak = argmax_per_frame(&row.to_owned().insert_axis(Axis(1)))[0];
            for k in 1..=peak {
                assert!(row[k] >= row[k - 1]);
            }
            for k in peak + 1..row.len() {
                assert!(row[k] <= row[k - 1]);
            }
            let first = row.iter().position(|&v| v > 0.0).unwrap();
            let last = row.iter().rposition(|&v| v > 0.0).unwrap();
            assert!(row
                .slice(ndarray::s![first..=last])
                .iter()
                .all(|&v| v > 0.0));
            assert!(first >= prev_support.0 && last >= prev_support.1);
            prev_support = (first, last);
        }
    }

    #[test]
    fn filter_centers_follow_mel_spacing() {
        let cfg = MelConfig::default();
        let fb = mel_filterbank(&cfg).unwrap();
        let bin_hz = 22050.0 / 1024.0;
        // Closed-form centers, independent of the band-edge helper.
        let mel_max = 2595.0 * (1.0f64 + 8000.0 / 700.0).log10();
        for (m, row) in fb.rows().into_iter().enumerate() {
            let center_mel = mel_max * (m + 1) as f64 / 81.0;
            let center_hz = 700.0 * (10f64.powf(center_mel / 2595.0) - 1.0);
            let peak = argmax_per_frame(&row.to_owned().insert_axis(Axis(1)))[0];
            assert!(
                (peak as f64 - center_hz / bin_hz).abs() <= 1.0,
                "filter {m}: peak bin {peak}, center {center_hz} Hz"
            );
        }
    }

    #[test]
    fn filterbank_rejects_bad_fmax() {
        let cfg = MelConfig {
            fmax_hz: 12000.0,
            ..MelConfig::default()
        };
        assert!(matches!(mel_filterbank(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn mel_of_silence_is_log_floor() {
        let cfg = MelConfig::default();
        let mel = mel_spectrogram(&AudioBuffer::silence(22050, 22050).unwrap(), &cfg).unwrap();
        assert_eq!(mel.n_frames(), 87);
        assert_eq!(mel.n_mels(), 80);
        assert!(mel.data().iter().all(|&v| v == LOG_FLOOR.ln()));
    }

    #[test]
    fn sine_mel_peak_is_stable() {
        let cfg = MelConfig::default();
        let mel = mel_spectrogram(&sine(440.0, 22050, 22050, 0.5), &cfg).unwrap();
        let all = argmax_per_frame(mel.data());
        let peaks = &all[2..all.len() - 2];
        assert!(peaks.iter().all(|&p| p == peaks[0]), "{all:?}");
        // The filter whose triangle contains 440 Hz most strongly.
        let edges = mel_band_edges(&cfg);
        assert!(edges[peaks[0]] < 440.0 && 440.0 < edges[peaks[0] + 2]);
    }

    proptest::proptest! {
        #[test]
        fn frame_count_law(n in 1usize..5000, hop in prop_hop()) {
            let cfg = MelConfig { hop_length: hop, ..MelConfig::default() };
            let buf = AudioBuffer::silence(n, 22050).unwrap();
            let mag = stft_magnitude(&buf, &cfg).unwrap();
            proptest::prop_assert_eq!(mag.ncols(), 1 + n / hop);
        }
    }

    fn prop_hop() -> impl proptest::strategy::Strategy<Value = usize> {
        proptest::sample::select(vec![64usize, 128, 256, 333, 1024])
    }
}
