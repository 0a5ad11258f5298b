//! End-to-end conversions shared by the CLI and benchmarks.

use std::fmt;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::eval::{mcd, TaskOutput};
use crate::interp::{resample_bandlimited, InterpolationMethod, KaiserResampleParams};
use crate::signal::{mel_cepstrum, mel_spectrogram, AudioBuffer, MelConfig, MelSpectrogram};
use crate::vocoder::{Generator, GeneratorConfig, InsertionPoint, RateConversionSpec};
use crate::wsola::{wsola, WsolaConfig};

/// Conversion factors commonly offered by playback applications.
pub const STANDARD_FACTORS: [f64; 7] = [0.25, 0.5, 0.75, 1.25, 1.5, 1.75, 2.0];

/// Cepstral coefficients (excluding the energy term) used for MCD.
pub const MCD_COEFFS: usize = 13;

/// A speaking-rate conversion method: one of the ten interpolation-layer
/// variants, or WSOLA applied to the generated waveform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Interpolation {
        insertion: InsertionPoint,
        method: InterpolationMethod,
    },
    Wsola,
}

impl Method {
    /// All eleven methods: the ten interpolation variants, then WSOLA.
    pub fn all() -> Vec<Method> {
        let mut v: Vec<Method> = InsertionPoint::ALL
            .iter()
            .flat_map(|&insertion| {
                InterpolationMethod::ALL
                    .iter()
                    .map(move |&method| Method::Interpolation { insertion, method })
            })
            .collect();
        v.push(Method::Wsola);
        v
    }

    pub fn insertion_label(&self) -> &'static str {
        match self {
            Method::Interpolation { insertion, .. } => insertion.as_str(),
            Method::Wsola => "waveform",
        }
    }

    pub fn method_label(&self) -> &'static str {
        match self {
            Method::Interpolation { method, .. } => method.as_str(),
            Method::Wsola => "wsola",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.insertion_label(), self.method_label())
    }
}

/// Mel analysis settings matching a generator: default frontend with the
/// generator's mel count and hop.
pub fn mel_config_for(config: &GeneratorConfig) -> MelConfig {
    MelConfig {
        n_mels: config.mel_channels,
        hop_length: config.hop_length(),
        ..MelConfig::default()
    }
}

/// Resamples `buffer` to the analysis rate when needed.
pub fn prepare_audio(buffer: &AudioBuffer, mel: &MelConfig) -> Result<AudioBuffer> {
    if buffer.sample_rate_hz() == mel.sample_rate_hz {
        return Ok(buffer.clone());
    }
    if buffer.is_empty() {
        return Err(Error::Empty("audio has no samples".into()));
    }
    let out = resample_bandlimited(
        buffer.samples(),
        buffer.sample_rate_hz() as f64,
        mel.sample_rate_hz as f64,
        &KaiserResampleParams::default(),
    )?;
    AudioBuffer::new(out, mel.sample_rate_hz)
}

/// Log-mel analysis after bringing the audio to the analysis rate.
pub fn analyze(buffer: &AudioBuffer, mel: &MelConfig) -> Result<MelSpectrogram> {
    mel_spectrogram(&prepare_audio(buffer, mel)?, mel)
}

/// Synthesizes `mel` at conversion factor `factor` with `method`, reporting
/// how long the conversion step itself took.
pub fn convert(
    generator: &Generator,
    mel: &MelSpectrogram,
    method: Method,
    factor: f64,
    wsola_config: &WsolaConfig,
) -> Result<TaskOutput> {
    match method {
        Method::Interpolation { insertion, method } => {
            let spec = RateConversionSpec::new(factor, insertion, method);
            let s = generator.synthesize(mel, Some(&spec))?;
            Ok(TaskOutput {
                audio: s.audio,
                conversion: s.conversion_time,
            })
        }
        Method::Wsola => {
            let generated = generator.forward(mel)?;
            let start = Instant::now();
            let audio = wsola(&generated, factor, wsola_config)?;
            Ok(TaskOutput {
                audio,
                conversion: start.elapsed(),
            })
        }
    }
}

/// Output sample count of `method` at `factor` on a `mel_frames`-frame input.
pub fn output_len(
    config: &GeneratorConfig,
    mel_frames: usize,
    method: Method,
    factor: f64,
) -> usize {
    match method {
        Method::Interpolation { insertion, method } => crate::vocoder::expected_output_len(
            config,
            mel_frames,
            Some(&RateConversionSpec::new(factor, insertion, method)),
        ),
        Method::Wsola => crate::interp::target_length(mel_frames * config.hop_length(), factor),
    }
}

/// DTW-aligned MCD between two waveforms.
pub fn cepstral_distortion(a: &AudioBuffer, b: &AudioBuffer, mel: &MelConfig) -> Result<f64> {
    let ca = mel_cepstrum(&analyze(a, mel)?, MCD_COEFFS)?;
    let cb = mel_cepstrum(&analyze(b, mel)?, MCD_COEFFS)?;
    mcd(ca.view(), cb.view())
}
