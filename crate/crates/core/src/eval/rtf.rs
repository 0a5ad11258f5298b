//! Real-time-factor measurement.
//!
//! [`measure_rtf`] times its task on the calling thread. Do not run two
//! measurements concurrently in one process: they compete for the CPU and
//! the numbers stop meaning anything.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::AudioBuffer;

/// What a timed task returns: its audio, and how much of its time went to
/// speaking-rate conversion. The rest counts as generation.
#[derive(Debug, Clone)]
pub struct TaskOutput {
    pub audio: AudioBuffer,
    pub conversion: Duration,
}

impl From<AudioBuffer> for TaskOutput {
    fn from(audio: AudioBuffer) -> Self {
        Self {
            audio,
            conversion: Duration::ZERO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtfReport {
    pub compute_seconds: f64,
    pub audio_seconds: f64,
    pub rtf: f64,
    pub generation_seconds: f64,
    pub conversion_seconds: f64,
}

/// Median of a sample; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs `task` once to warm up and then `repeats` timed times, reporting
/// the median compute time over `audio_seconds_out`.
///
/// Returns the report and the audio of the last timed run.
pub fn measure_rtf<F, T>(
    mut task: F,
    audio_seconds_out: f64,
    repeats: usize,
) -> Result<(RtfReport, AudioBuffer)>
where
    F: FnMut() -> Result<T>,
    T: Into<TaskOutput>,
{
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    if audio_seconds_out.is_nan() || audio_seconds_out <= 0.0 {
        return Err(Error::InvalidArgument(
            "audio duration for RTF must be positive".into(),
        ));
    }
    task()?;

    let mut runs = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let out: TaskOutput = task()?.into();
        let total = start.elapsed().as_secs_f64();
        let conversion = out.conversion.as_secs_f64().min(total);
        runs.push((total, conversion));
        last = Some(out.audio);
    }

    let totals: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let compute = median(&totals);
    let conversion = median_paired(&runs).min(compute).max(0.0);
    Ok((
        RtfReport {
            compute_seconds: compute,
            audio_seconds: audio_seconds_out,
            rtf: compute / audio_seconds_out,
            generation_seconds: compute - conversion,
            conversion_seconds: conversion,
        },
        last.expect("repeats >= 1"),
    ))
}

/// Conversion share belonging to the median-total run(s).
fn median_paired(runs: &[(f64, f64)]) -> f64 {
    let mut sorted = runs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2].1
    } else {
        0.5 * (sorted[n / 2 - 1].1 + sorted[n / 2].1)
    }
}
