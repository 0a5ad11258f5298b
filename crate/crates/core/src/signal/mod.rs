//! Audio containers, windows, spectral analysis and cepstral features.

mod audio;
mod cepstrum;
mod spectral;
mod window;

pub use audio::{AudioBuffer, WavFormat};
pub use cepstrum::mel_cepstrum;
pub use spectral::{
    argmax_per_frame, hz_to_mel, mel_band_edges, mel_filterbank, mel_spectrogram, mel_to_hz,
    stft_magnitude, MelConfig, MelSpectrogram, LOG_FLOOR,
};
pub(crate) use window::kaiser_taper;
pub use window::{bessel_i0, hann_window, kaiser_window};
