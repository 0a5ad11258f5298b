//! Speaking-rate control for a HiFi-GAN-style neural vocoder.
//!
//! The generator stretches the time axis of its input mel spectrogram, or
//! of a hidden feature after any upsampling block, with either Kaiser-windowed
//! sinc resampling or align-corners linear interpolation. WSOLA on the
//! generated waveform is provided as the conventional baseline, together with
//! the measurements used to compare them: DTW-aligned mel-cepstral
//! distortion, real-time factor and mora-per-second speaking rate.
//!
//! ```
//! use ratewarp_core::{Generator, GeneratorConfig, InsertionPoint, InterpolationMethod,
//!     RateConversionSpec, WeightStore, MelConfig, MelSpectrogram};
//! use ndarray::Array2;
//!
//! let config = GeneratorConfig { base_channels: 16, ..GeneratorConfig::default() };
//! let generator = Generator::new(WeightStore::init_random(&config, 7)?)?;
//! let mel = MelSpectrogram::new(Array2::zeros((80, 10)), MelConfig::default())?;
//! let spec = RateConversionSpec::new(2.0, InsertionPoint::Mel, InterpolationMethod::Linear);
//! let fast = generator.forward_with_rate(&mel, &spec)?;
//! assert_eq!(fast.len(), 5 * 256);
//! # Ok::<(), ratewarp_core::Error>(())
//! ```

pub mod error;
pub mod eval;
pub mod interp;
pub mod pipeline;
pub mod signal;
pub mod vocoder;
pub mod wsola;

pub use error::{Error, Result};
pub use eval::{
    conversion_factor, dtw_align, mcd, measure_rtf, speaking_rate, voiced_duration, DtwPath,
    EvalReport, RtfReport, SpeakingRate, TaskOutput, VadConfig,
};
pub use interp::{
    resample_bandlimited, stretch_time_bandlimited, stretch_time_linear, target_length,
    InterpolationMethod, KaiserResampleParams,
};
pub use pipeline::{Method, STANDARD_FACTORS};
pub use signal::{
    mel_cepstrum, mel_spectrogram, AudioBuffer, MelConfig, MelSpectrogram, WavFormat,
};
pub use vocoder::{
    Generator, GeneratorConfig, InsertionPoint, RateConversionSpec, Synthesis, WeightStore,
};
pub use wsola::{wsola, WsolaConfig};
