use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ratewarp_core::{InsertionPoint, InterpolationMethod, WavFormat};

/// Smallest and largest accepted conversion factors.
pub const FACTOR_RANGE: (f64, f64) = (0.05, 20.0);

#[derive(Debug, Parser)]
#[command(
    name = "ratewarp",
    version,
    about = "Speaking-rate control inside a neural vocoder"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Change speaking rate with WSOLA on the waveform.
    Wsola(WsolaArgs),
    /// Change speaking rate by interpolating inside the vocoder.
    Warp(WarpArgs),
    /// Band-limited sample-rate conversion.
    Resample(ResampleArgs),
    /// Write the log-mel spectrogram of a WAV file as JSON.
    Mel(MelArgs),
    /// Create a seeded generator weight file.
    GenInit(GenInitArgs),
    /// DTW-aligned mel-cepstral distortion between two WAV files.
    EvalMcd(EvalMcdArgs),
    /// Real-time factor of all eleven methods at one factor.
    EvalRtf(EvalRtfArgs),
    /// Mora-per-second speaking rate of a WAV file or a corpus directory.
    EvalRate(EvalRateArgs),
    /// Every method at every factor, one JSON report per line.
    Matrix(MatrixArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Pcm16,
    Float32,
}

impl From<FormatArg> for WavFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Pcm16 => WavFormat::Pcm16,
            FormatArg::Float32 => WavFormat::Float32,
        }
    }
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    /// Generator weight file (RWV1). Defaults to seeded random weights.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Seed for random weights when no weight file is given.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct WsolaArgs {
    #[arg(long)]
    pub factor: f64,
    #[arg(long, default_value_t = 1024)]
    pub frame_length: usize,
    #[arg(long)]
    pub synthesis_hop: Option<usize>,
    #[arg(long, default_value_t = 512)]
    pub tolerance: usize,
    #[arg(long, value_enum, default_value = "pcm16")]
    pub format: FormatArg,
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct WarpArgs {
    #[arg(long)]
    pub factor: f64,
    #[arg(long, value_parser = parse_insertion)]
    pub insertion: InsertionPoint,
    #[arg(long, value_parser = parse_method)]
    pub method: InterpolationMethod,
    #[command(flatten)]
    pub weights: WeightsArgs,
    #[arg(long, value_enum, default_value = "pcm16")]
    pub format: FormatArg,
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    /// Target sample rate in Hz.
    #[arg(long)]
    pub rate: u32,
    #[arg(long, value_enum, default_value = "pcm16")]
    pub format: FormatArg,
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct MelArgs {
    pub input: PathBuf,
    /// Output JSON path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenInitArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub base_channels: usize,
}

#[derive(Debug, Args)]
pub struct EvalMcdArgs {
    pub reference: PathBuf,
    pub converted: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalRtfArgs {
    #[arg(long)]
    pub factor: f64,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[command(flatten)]
    pub weights: WeightsArgs,
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalRateArgs {
    /// A WAV file, or a corpus root laid out as <speaker>/<rate>/<utt>.wav
    /// with <utt>.mora sidecars.
    pub path: PathBuf,
    /// Mora count for a single file (overrides its sidecar).
    #[arg(long)]
    pub mora: Option<u32>,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.25,0.5,0.75,1.25,1.5,1.75,2.0"
    )]
    pub factors: Vec<f64>,
    #[command(flatten)]
    pub weights: WeightsArgs,
    /// Ground-truth recording for MCD; the input itself when omitted.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Mora count of the input; read from <input>.mora when omitted.
    #[arg(long)]
    pub mora: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// JSON-lines output path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    pub input: PathBuf,
}

fn parse_insertion(s: &str) -> Result<InsertionPoint, String> {
    s.parse().map_err(|e: ratewarp_core::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<InterpolationMethod, String> {
    s.parse().map_err(|e: ratewarp_core::Error| e.to_string())
}
