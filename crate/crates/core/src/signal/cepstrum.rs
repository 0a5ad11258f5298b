use std::f64::consts::PI;

use ndarray::Array2;

use super::spectral::MelSpectrogram;
use crate::error::{Error, Result};

/// Mel cepstrum: orthonormal DCT-II over the mel axis of every frame,
/// keeping coefficients `1..=n_coeffs` (the energy term is dropped).
///
/// Output shape is `(n_coeffs, n_frames)`.
pub fn mel_cepstrum(mel: &MelSpectrogram, n_coeffs: usize) -> Result<Array2<f32>> {
    let n = mel.n_mels();
    if n_coeffs == 0 || n_coeffs >= n {
        return Err(Error::InvalidArgument(format!(
            "n_coeffs must be in 1..{n} for {n} mel bins, got {n_coeffs}"
        )));
    }
    let basis = Array2::from_shape_fn((n_coeffs, n), |(k, i)| {
        let k = k + 1;
        let scale = (2.0 / n as f64).sqrt();
        (scale * (PI * k as f64 * (i as f64 + 0.5) / n as f64).cos()) as f32
    });
    Ok(basis.dot(mel.data()))
}
