//! Waveform-similarity overlap-add (WSOLA) time-scale modification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::target_length;
use crate::signal::{hann_window, AudioBuffer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WsolaConfig {
    /// Frame length in samples; must be even.
    pub frame_length: usize,
    pub synthesis_hop: usize,
    /// Maximum shift, in samples, of an analysis frame from its nominal position.
    pub tolerance: usize,
}

impl Default for WsolaConfig {
    fn default() -> Self {
        Self {
            frame_length: 1024,
            synthesis_hop: 512,
            tolerance: 512,
        }
    }
}

impl WsolaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frame_length == 0 || !self.frame_length.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "WSOLA frame length must be positive and even, got {}",
                self.frame_length
            )));
        }
        if self.synthesis_hop == 0 || self.synthesis_hop > self.frame_length {
            return Err(Error::InvalidConfig(format!(
                "WSOLA synthesis hop must be in 1..={}, got {}",
                self.frame_length, self.synthesis_hop
            )));
        }
        if self.tolerance > self.frame_length {
            return Err(Error::InvalidConfig(format!(
                "WSOLA tolerance {} exceeds frame length {}",
                self.tolerance, self.frame_length
            )));
        }
        Ok(())
    }
}

/// Output of [`wsola_traced`]: the stretched audio plus the offset chosen for
/// every synthesis frame.
#[derive(Debug, Clone)]
pub struct WsolaTrace {
    pub output: AudioBuffer,
    pub offsets: Vec<isize>,
}

/// Changes duration by the conversion factor `f` (output length is
/// `target_length(len, f)`) while keeping the pitch.
pub fn wsola(input: &AudioBuffer, factor: f64, config: &WsolaConfig) -> Result<AudioBuffer> {
    wsola_traced(input, factor, config).map(|t| t.output)
}

pub fn wsola_traced(input: &AudioBuffer, factor: f64, config: &WsolaConfig) -> Result<WsolaTrace> {
    config.validate()?;
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "conversion factor must be positive, got {factor}"
        )));
    }
    let x = input.samples();
    let frame = config.frame_length;
    if x.len() < frame {
        return Err(Error::InvalidArgument(format!(
            "WSOLA input has {} samples, fewer than one {frame}-sample frame",
            x.len()
        )));
    }

    let out_len = target_length(x.len(), factor);
    let hop_out = config.synthesis_hop;
    let hop_in = hop_out as f64 * factor;
    let tol = config.tolerance as isize;
    let last_full = (x.len() - frame) as isize;
    let window = hann_window(frame);

    let n_frames = out_len.div_ceil(hop_out);
    let mut acc = vec![0.0f64; n_frames * hop_out + frame];
    let mut weight = vec![0.0f64; acc.len()];
    let mut offsets = Vec::with_capacity(n_frames);
    let mut prev: isize = 0;
    let mut candidate = vec![0.0f64; frame];
    let mut natural = vec![0.0f64; frame];

    for k in 0..n_frames {
        let nominal = (k as f64 * hop_in).round() as isize;
        let offset = if k == 0 {
            0
        } else {
            read_frame(x, prev + hop_out as isize, &mut natural);
            // Positions past the last full frame are only searched backwards.
            let lo = (-tol).max(-nominal);
            let hi = if nominal <= last_full {
                tol.min(last_full - nominal)
            } else {
                0
            };
            best_offset(x, nominal, lo, hi, &natural, &mut candidate)
        };
        let pos = nominal + offset;
        offsets.push(offset);
        prev = pos;

        read_frame(x, pos, &mut candidate);
        let out_pos = k * hop_out;
        for i in 0..frame {
            acc[out_pos + i] += candidate[i] * window[i];
            weight[out_pos + i] += window[i];
        }
    }

    let samples = acc
        .iter()
        .zip(&weight)
        .take(out_len)
        .map(|(&a, &w)| if w > 1e-6 { (a / w) as f32 } else { 0.0 })
        .collect();
    Ok(WsolaTrace {
        output: AudioBuffer::new(samples, input.sample_rate_hz())?,
        offsets,
    })
}

/// Copies `frame.len()` samples starting at `pos`, zero outside the signal.
fn read_frame(x: &[f32], pos: isize, frame: &mut [f64]) {
    for (i, slot) in frame.iter_mut().enumerate() {
        let idx = pos + i as isize;
        *slot = if idx >= 0 && (idx as usize) < x.len() {
            x[idx as usize] as f64
        } else {
            0.0
        };
    }
}

/// Searches offsets in `[lo, hi]` in the order 0, -1, +1, -2, +2, ... and
/// keeps the first one with the strictly highest normalized correlation.
fn best_offset(
    x: &[f32],
    nominal: isize,
    lo: isize,
    hi: isize,
    natural: &[f64],
    candidate: &mut [f64],
) -> isize {
    let natural_energy: f64 = natural.iter().map(|v| v * v).sum();
    let mut best = (f64::NEG_INFINITY, 0isize);
    let reach = (-lo).max(hi).max(0);
    let mut first = true;
    let order = std::iter::once(0).chain((1..=reach).flat_map(|d| [-d, d]));
    for delta in order.filter(|d| (lo..=hi).contains(d)) {
        read_frame(x, nominal + delta, candidate);
        let score = similarity(candidate, natural, natural_energy);
        if first || score > best.0 {
            best = (score, delta);
            first = false;
        }
    }
    if first {
        0
    } else {
        best.1
    }
}

fn similarity(a: &[f64], b: &[f64], b_energy: f64) -> f64 {
    let (mut dot, mut a_energy) = (0.0, 0.0);
    for (p, q) in a.iter().zip(b) {
        dot += p * q;
        a_energy += p * p;
    }
    let denom = (a_energy * b_energy).sqrt();
    if denom > 0.0 {
        dot / denom
    } else {
        0.0
    }
}
