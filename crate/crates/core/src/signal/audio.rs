//! Mono waveform container and WAV file I/O.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A mono waveform with its sample rate.
///
/// Samples are nominally in `[-1, 1]` and always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioBuffer {
    samples: Vec<f32>,
    sample_rate_hz: u32,
}

/// On-disk sample encoding for [`AudioBuffer::save_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavFormat {
    Pcm16,
    Float32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f32>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidArgument(
                "sample rate must be positive".into(),
            ));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn silence(len: usize, sample_rate_hz: u32) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate_hz)
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
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

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Reads a PCM16 or IEEE-float32 WAV file, downmixing any channels by
    /// averaging.
    pub fn load_wav(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let wav_err = |source| Error::Wav {
            path: path.to_path_buf(),
            source,
        };
        let reader = WavReader::open(path).map_err(|e| match e {
            hound::Error::IoError(io) => Error::io(path, io),
            hound::Error::Unsupported => {
                Error::UnsupportedCodec("container feature not supported".into())
            }
            other => wav_err(other),
        })?;
        let spec = reader.spec();
        let channels = spec.channels as usize;
        if channels == 0 || channels > 2 {
            return Err(Error::UnsupportedCodec(format!("{channels} channels")));
        }

        let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
            (SampleFormat::Int, 16) => reader
                .into_samples::<i16>()
                .map(|s| s.map(|v| v as f32 / 32768.0))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err)?,
            (SampleFormat::Float, 32) => reader
                .into_samples::<f32>()
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err)?,
            (format, bits) => {
                return Err(Error::UnsupportedCodec(format!("{format:?} {bits}-bit")))
            }
        };
        if interleaved.is_empty() {
            return Err(Error::EmptyData(path.to_path_buf()));
        }

        let samples = if channels == 1 {
            interleaved
        } else {
            interleaved
                .chunks_exact(channels)
                .map(|frame| frame.iter().sum::<f32>() / channels as f32)
                .collect()
        };
        Self::new(samples, spec.sample_rate)
    }

    /// Writes a mono WAV file. Samples outside `[-1, 1]` are clipped.
    pub fn save_wav(&self, path: impl AsRef<Path>, format: WavFormat) -> Result<()> {
        let path = path.as_ref();
        let map = |e: hound::Error| match e {
            hound::Error::IoError(io) => Error::io(path, io),
            other => Error::Wav {
                path: path.to_path_buf(),
                source: other,
            },
        };
        let (bits_per_sample, sample_format) = match format {
            WavFormat::Pcm16 => (16, SampleFormat::Int),
            WavFormat::Float32 => (32, SampleFormat::Float),
        };
        let spec = WavSpec {
            channels: 1,
            sample_rate: self.sample_rate_hz,
            bits_per_sample,
            sample_format,
        };
        let mut writer = WavWriter::create(path, spec).map_err(map)?;
        for &s in &self.samples {
            let s = s.clamp(-1.0, 1.0);
            match format {
                WavFormat::Pcm16 => writer.write_sample(pcm16_from_f32(s)).map_err(map)?,
                WavFormat::Float32 => writer.write_sample(s).map_err(map)?,
            }
        }
        writer.finalize().map_err(map)
    }
}

fn pcm16_from_f32(s: f32) -> i16 {
    (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}
