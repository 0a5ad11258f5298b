//! Energy-threshold voice activity detection and mora-rate measurement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::AudioBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VadConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    /// Voicing threshold in dB relative to the loudest frame.
    pub threshold_db: f64,
    /// Longest run of quiet frames between voiced frames that still counts
    /// as voiced.
    pub hangover_frames: usize,
}

impl Default for VadConfig {
    fn default() -> Self {
        Self {
            frame_ms: 30.0,
            hop_ms: 10.0,
            threshold_db: -40.0,
            hangover_frames: 5,
        }
    }
}

impl VadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.frame_ms > 0.0 && self.hop_ms > 0.0 && self.hop_ms <= self.frame_ms)
            || !self.threshold_db.is_finite()
        {
            return Err(Error::InvalidConfig(format!("invalid VAD config {self:?}")));
        }
        Ok(())
    }
}

/// Per-frame voicing decisions, one per hop, after gap filling.
pub fn voiced_frames(buffer: &AudioBuffer, config: &VadConfig) -> Result<Vec<bool>> {
    config.validate()?;
    let x = buffer.samples();
    let rate = buffer.sample_rate_hz() as f64;
    let hop = config.hop_ms * rate / 1000.0;
    let frame_len = ((config.frame_ms * rate / 1000.0).round() as usize).max(1);
    // Frames start every hop; the count keeps frames * hop within the buffer.
    let n_frames = (x.len() as f64 / hop).floor() as usize;

    let energies: Vec<f64> = (0..n_frames)
        .map(|k| {
            let start = ((k as f64 * hop).round() as usize).min(x.len());
            let end = (start + frame_len).min(x.len());
            let seg = &x[start..end];
            if seg.is_empty() {
                0.0
            } else {
                seg.iter().map(|&s| (s as f64).powi(2)).sum::<f64>() / seg.len() as f64
            }
        })
        .collect();
    let peak = energies.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Ok(vec![false; n_frames]);
    }
    let mut voiced: Vec<bool> = energies
        .iter()
        .map(|&e| e > 0.0 && 10.0 * (e / peak).log10() > config.threshold_db)
        .collect();

    // Hangover: bridge short quiet runs that are followed by speech again.
    let mut last_voiced: Option<usize> = None;
    for k in 0..voiced.len() {
        if voiced[k] {
            if let Some(prev) = last_voiced {
                let gap = k - prev - 1;
                if gap > 0 && gap <= config.hangover_frames {
                    voiced[prev + 1..k].iter_mut().for_each(|v| *v = true);
                }
            }
            last_voiced = Some(k);
        }
    }
    Ok(voiced)
}

/// Seconds of voiced audio: voiced frame count times the hop.
pub fn voiced_duration(buffer: &AudioBuffer, config: &VadConfig) -> Result<f64> {
    let frames = voiced_frames(buffer, config)?;
    Ok(frames.iter().filter(|&&v| v).count() as f64 * config.hop_ms / 1000.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeakingRate {
    pub mora_per_second: f64,
    pub mora_count: u32,
    pub voiced_seconds: f64,
}

impl SpeakingRate {
    pub fn new(mora_count: u32, voiced_seconds: f64) -> Result<Self> {
        if mora_count == 0 {
            return Err(Error::InvalidArgument("mora count must be positive".into()));
        }
        if voiced_seconds.is_nan() || voiced_seconds <= 0.0 {
            return Err(Error::InvalidArgument(
                "speaking rate needs a positive voiced duration".into(),
            ));
        }
        Ok(Self {
            mora_per_second: mora_count as f64 / voiced_seconds,
            mora_count,
            voiced_seconds,
        })
    }
}

/// Morae per second of voiced speech.
pub fn speaking_rate(
    mora_count: u32,
    buffer: &AudioBuffer,
    vad: &VadConfig,
) -> Result<SpeakingRate> {
    SpeakingRate::new(mora_count, voiced_duration(buffer, vad)?)
}
