//! HiFi-GAN-style generator (inference only) with a pluggable time-stretching
//! layer at the mel input or after any upsampling block.

mod config;
mod conv;
mod generator;
mod weights;

pub use config::GeneratorConfig;
pub use conv::{conv1d, transposed_conv1d};
pub use generator::{
    expected_output_len, forward, forward_with_rate, Generator, InsertionPoint, RateConversionSpec,
    Synthesis,
};
pub use weights::{expected_manifest, TensorEntry, WeightStore, INIT_STD, MAGIC};
