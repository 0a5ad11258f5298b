//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use ndarray::Array2;
use ratewarp_core::{
    AudioBuffer, Generator, GeneratorConfig, MelConfig, MelSpectrogram, WeightStore,
};

/// Seeded generator with the default (128-channel) configuration.
pub fn default_generator() -> Generator {
    let config = GeneratorConfig::default();
    Generator::new(WeightStore::init_random(&config, 0).expect("valid config"))
        .expect("valid store")
}

/// Deterministic synthetic log-mel input with `frames` frames.
pub fn synthetic_mel(frames: usize) -> MelSpectrogram {
    let data = Array2::from_shape_fn((80, frames), |(m, t)| {
        ((m as f32 * 0.21 + t as f32 * 0.45).sin() * 2.5) - 4.0
    });
    MelSpectrogram::new(data, MelConfig::default()).expect("valid mel")
}

/// Pure tone at 22050 Hz.
pub fn tone(freq: f64, seconds: f64) -> AudioBuffer {
    let n = (seconds * 22050.0).round() as usize;
    let s = (0..n)
        .map(|i| (0.5 * (2.0 * PI * freq * i as f64 / 22050.0).sin()) as f32)
        .collect();
    AudioBuffer::new(s, 22050).expect("finite samples")
}
