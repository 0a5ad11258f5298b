//! Time-axis interpolation: Kaiser-windowed sinc resampling and
//! align-corners linear interpolation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{bessel_i0, kaiser_taper};

/// How a feature sequence is stretched along time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpolationMethod {
    /// Kaiser-windowed sinc resampling of every channel as a waveform.
    #[serde(rename = "kaiser")]
    BandlimitedKaiser,
    /// Align-corners linear interpolation, as in image scaling.
    Linear,
}

impl InterpolationMethod {
    pub const ALL: [InterpolationMethod; 2] = [Self::BandlimitedKaiser, Self::Linear];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::BandlimitedKaiser => "kaiser",
            Self::Linear => "linear",
        }
    }
}

impl fmt::Display for InterpolationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InterpolationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kaiser" | "bandlimited" => Ok(Self::BandlimitedKaiser),
            "linear" => Ok(Self::Linear),
            other => Err(Error::InvalidArgument(format!(
                "unknown interpolation method `{other}` (expected linear or kaiser)"
            ))),
        }
    }
}

/// Kaiser-windowed sinc filter design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KaiserResampleParams {
    /// Sinc zero crossings on each side of the kernel centre.
    pub zero_crossings: usize,
    pub beta: f64,
    /// Cutoff as a fraction of the lower of the two Nyquist frequencies.
    pub rolloff: f64,
}

impl Default for KaiserResampleParams {
    fn default() -> Self {
        Self {
            zero_crossings: 16,
            beta: 8.555,
            rolloff: 0.99,
        }
    }
}

impl KaiserResampleParams {
    fn validate(&self) -> Result<()> {
        if self.zero_crossings == 0
            || !(self.beta.is_finite() && self.beta >= 0.0)
            || !(self.rolloff > 0.0 && self.rolloff <= 1.0)
        {
            return Err(Error::InvalidArgument(format!(
                "invalid Kaiser resampling parameters {self:?}"
            )));
        }
        Ok(())
    }
}

/// Length after changing duration by the conversion factor
/// `f = t_src / t_tgt`: `max(1, round(source_length / f))`.
pub fn target_length(source_length: usize, factor: f64) -> usize {
    // f64::round rounds half away from zero.
    ((source_length as f64 / factor).round() as usize).max(1)
}

fn check_factor(factor: f64) -> Result<()> {
    if factor.is_finite() && factor > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "conversion factor must be positive and finite, got {factor}"
        )))
    }
}

/// Band-limited resampling from `in_rate` to `out_rate`.
///
/// Output sample `m` sits at input position `m * in_rate / out_rate` and is
/// the sum of neighbouring inputs weighted by a Kaiser-windowed sinc whose
/// cutoff is `rolloff * min(in_rate, out_rate) / 2`. Samples beyond either
/// end of the signal count as zero.
pub fn resample_bandlimited(
    signal: &[f32],
    in_rate: f64,
    out_rate: f64,
    params: &KaiserResampleParams,
) -> Result<Vec<f32>> {
    if !(in_rate.is_finite() && in_rate > 0.0 && out_rate.is_finite() && out_rate > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "resampling rates must be positive, got {in_rate} -> {out_rate}"
        )));
    }
    if signal.is_empty() {
        return Err(Error::Empty("resampler input has no samples".into()));
    }
    params.validate()?;
    let out_len = ((signal.len() as f64 * out_rate / in_rate).round() as usize).max(1);
    if in_rate == out_rate {
        return Ok(signal.to_vec());
    }
    Ok(SincKernel::new(in_rate, out_rate, params).apply(signal, out_len))
}

struct SincKernel {
    step: f64,
    cutoff: f64,
    half_width: f64,
    beta: f64,
    i0_beta: f64,
}

impl SincKernel {
    fn new(in_rate: f64, out_rate: f64, params: &KaiserResampleParams) -> Self {
        // Cutoff in cycles per input sample relative to the input Nyquist.
        let cutoff = params.rolloff * (out_rate / in_rate).min(1.0);
        Self {
            step: in_rate / out_rate,
            cutoff,
            half_width: params.zero_crossings as f64 / cutoff,
            beta: params.beta,
            i0_beta: bessel_i0(params.beta),
        }
    }

    fn weight(&self, t: f64) -> f64 {
        let x = self.cutoff * t;
        let sinc = if x == 0.0 {
            1.0
        } else {
            (PI * x).sin() / (PI * x)
        };
        self.cutoff * sinc * kaiser_taper(t / self.half_width, self.beta, self.i0_beta)
    }

    fn taps(&self) -> usize {
        2 * self.half_width.ceil() as usize + 1
    }

    fn apply(&self, signal: &[f32], out_len: usize) -> Vec<f32> {
        let last = signal.len() as isize - 1;
        (0..out_len)
            .map(|m| {
                let center = m as f64 * self.step;
                let lo = ((center - self.half_width).ceil() as isize).max(0);
                let hi = ((center + self.half_width).floor() as isize).min(last);
                let mut acc = 0.0f64;
                for n in lo..=hi {
                    acc += signal[n as usize] as f64 * self.weight(center - n as f64);
                }
                acc as f32
            })
            .collect()
    }
}

/// Multiply-accumulates spent by [`stretch_time_bandlimited`].
pub fn bandlimited_cost(
    channels: usize,
    source_len: usize,
    factor: f64,
    params: &KaiserResampleParams,
) -> u64 {
    if factor == 1.0 {
        return 0;
    }
    let kernel = SincKernel::new(factor, 1.0, params);
    (channels * target_length(source_len, factor) * kernel.taps()) as u64
}

/// Multiply-accumulates spent by [`stretch_time_linear`].
pub fn linear_cost(channels: usize, source_len: usize, factor: f64) -> u64 {
    if factor == 1.0 {
        return 0;
    }
    (2 * channels * target_length(source_len, factor)) as u64
}

/// Resamples every row of a `(channels, time)` array by the conversion
/// factor; output has exactly `target_length(time, factor)` columns.
pub fn stretch_time_bandlimited(
    feature: ArrayView2<'_, f32>,
    factor: f64,
    params: &KaiserResampleParams,
) -> Result<Array2<f32>> {
    check_factor(factor)?;
    params.validate()?;
    let (channels, len) = feature.dim();
    if len == 0 {
        return Err(Error::Empty("feature has no time steps".into()));
    }
    let out_len = target_length(len, factor);
    if factor == 1.0 {
        return Ok(feature.to_owned());
    }
    let kernel = SincKernel::new(factor, 1.0, params);
    let mut out = Array2::<f32>::zeros((channels, out_len));
    let mut row_buf = Vec::with_capacity(len);
    for (c, row) in feature.rows().into_iter().enumerate() {
        row_buf.clear();
        row_buf.extend(row.iter().copied());
        let resampled = kernel.apply(&row_buf, out_len);
        for (dst, src) in out.row_mut(c).iter_mut().zip(resampled) {
            *dst = src;
        }
    }
    Ok(out)
}

/// Align-corners linear interpolation along the time (second) axis.
///
/// The first and last output columns equal the first and last input columns.
pub fn stretch_time_linear(feature: ArrayView2<'_, f32>, factor: f64) -> Result<Array2<f32>> {
    check_factor(factor)?;
    let len = feature.ncols();
    if len == 0 {
        return Err(Error::Empty("feature has no time steps".into()));
    }
    Ok(resize_time_linear(feature, target_length(len, factor)))
}

/// Align-corners linear resize of the time axis to exactly `out_len` columns.
pub fn resize_time_linear(feature: ArrayView2<'_, f32>, out_len: usize) -> Array2<f32> {
    let (channels, len) = feature.dim();
    if out_len == len {
        return feature.to_owned();
    }
    let mut out = Array2::<f32>::zeros((channels, out_len));
    let scale = if out_len > 1 {
        (len - 1) as f64 / (out_len - 1) as f64
    } else {
        0.0
    };
    for j in 0..out_len {
        let p = if j + 1 == out_len && out_len > 1 {
            (len - 1) as f64
        } else {
            j as f64 * scale
        };
        let left = p.floor() as usize;
        let right = (left + 1).min(len - 1);
        let w = (p - left as f64) as f32;
        for c in 0..channels {
            let a = feature[[c, left]];
            let b = feature[[c, right]];
            out[[c, j]] = if w == 0.0 { a } else { (1.0 - w) * a + w * b };
        }
    }
    out
}

/// Dispatches to the stretch routine for `method`.
pub fn stretch_time(
    feature: ArrayView2<'_, f32>,
    factor: f64,
    method: InterpolationMethod,
    params: &KaiserResampleParams,
) -> Result<Array2<f32>> {
    match method {
        InterpolationMethod::BandlimitedKaiser => stretch_time_bandlimited(feature, factor, params),
        InterpolationMethod::Linear => stretch_time_linear(feature, factor),
    }
}
