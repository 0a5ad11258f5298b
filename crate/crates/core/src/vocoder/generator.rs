//! Generator forward pass with an optional time-stretching layer.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::config::GeneratorConfig;
use super::conv::{conv1d, conv_macs, transposed_conv1d};
use super::weights::WeightStore;
use crate::error::{Error, Result};
use crate::interp::{
    bandlimited_cost, linear_cost, stretch_time, target_length, InterpolationMethod,
    KaiserResampleParams,
};
use crate::signal::{AudioBuffer, MelSpectrogram};

/// Where the interpolation layer sits in the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InsertionPoint {
    /// On the input mel spectrogram.
    Mel,
    AfterBlock1,
    AfterBlock2,
    AfterBlock3,
    AfterBlock4,
}

impl InsertionPoint {
    pub const ALL: [InsertionPoint; 5] = [
        Self::Mel,
        Self::AfterBlock1,
        Self::AfterBlock2,
        Self::AfterBlock3,
        Self::AfterBlock4,
    ];

    /// Number of upsampling blocks that run before the stretch.
    pub fn blocks_before(self) -> usize {
        match self {
            Self::Mel => 0,
            Self::AfterBlock1 => 1,
            Self::AfterBlock2 => 2,
            Self::AfterBlock3 => 3,
            Self::AfterBlock4 => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Mel => "mel",
            Self::AfterBlock1 => "1",
            Self::AfterBlock2 => "2",
            Self::AfterBlock3 => "3",
            Self::AfterBlock4 => "4",
        }
    }
}

impl fmt::Display for InsertionPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InsertionPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mel" | "0" => Ok(Self::Mel),
            "1" => Ok(Self::AfterBlock1),
            "2" => Ok(Self::AfterBlock2),
            "3" => Ok(Self::AfterBlock3),
            "4" => Ok(Self::AfterBlock4),
            other => Err(Error::InvalidArgument(format!(
                "unknown insertion point `{other}` (expected mel, 1, 2, 3 or 4)"
            ))),
        }
    }
}

/// One speaking-rate conversion: factor `f = t_src / t_tgt`, where to
/// stretch, and how.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConversionSpec {
    pub factor: f64,
    pub insertion: InsertionPoint,
    pub method: InterpolationMethod,
    #[serde(default)]
    pub kaiser: KaiserResampleParams,
}

impl RateConversionSpec {
    pub fn new(factor: f64, insertion: InsertionPoint, method: InterpolationMethod) -> Self {
        Self {
            factor,
            insertion,
            method,
            kaiser: KaiserResampleParams::default(),
        }
    }

    /// The ten insertion/method combinations at one factor.
    pub fn all_proposed(factor: f64) -> Vec<Self> {
        InsertionPoint::ALL
            .iter()
            .flat_map(|&p| {
                InterpolationMethod::ALL
                    .iter()
                    .map(move |&m| Self::new(factor, p, m))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.factor.is_finite() && self.factor > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "conversion factor must be positive, got {}",
                self.factor
            )))
        }
    }
}

/// Result of a traced forward pass.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub audio: AudioBuffer,
    /// Multiply-accumulates in convolutions and in the interpolation layer.
    pub macs: u64,
    /// Wall-clock time spent inside the interpolation layer.
    pub conversion_time: Duration,
    /// Time length after the input conv and after every upsampling block.
    pub stage_lengths: Vec<usize>,
}

/// Output sample count of a conversion on a `mel_frames`-frame input.
pub fn expected_output_len(
    config: &GeneratorConfig,
    mel_frames: usize,
    spec: Option<&RateConversionSpec>,
) -> usize {
    let hop = config.hop_length();
    match spec {
        None => mel_frames * hop,
        Some(s) => {
            let up = config.upsampling_through(s.insertion.blocks_before());
            target_length(mel_frames * up, s.factor) * (hop / up)
        }
    }
}

/// Generator bound to a set of weights.
#[derive(Debug, Clone)]
pub struct Generator {
    store: WeightStore,
}

impl Generator {
    pub fn new(store: WeightStore) -> Result<Self> {
        store.config().validate()?;
        Ok(Self { store })
    }

    pub fn config(&self) -> &GeneratorConfig {
        self.store.config()
    }

    pub fn store(&self) -> &WeightStore {
        &self.store
    }

    pub fn forward(&self, mel: &MelSpectrogram) -> Result<AudioBuffer> {
        Ok(self.synthesize(mel, None)?.audio)
    }

    pub fn forward_with_rate(
        &self,
        mel: &MelSpectrogram,
        spec: &RateConversionSpec,
    ) -> Result<AudioBuffer> {
        Ok(self.synthesize(mel, Some(spec))?.audio)
    }

    /// Runs the generator, stretching the time axis at `spec.insertion`
    /// when a spec is given.
    pub fn synthesize(
        &self,
        mel: &MelSpectrogram,
        spec: Option<&RateConversionSpec>,
    ) -> Result<Synthesis> {
        let cfg = self.config();
        if mel.n_mels() != cfg.mel_channels {
            return Err(Error::Shape(format!(
                "mel has {} channels, generator expects {}",
                mel.n_mels(),
                cfg.mel_channels
            )));
        }
        if mel.config().hop_length != cfg.hop_length() {
            return Err(Error::Shape(format!(
                "mel hop {} does not match generator upsampling {}",
                mel.config().hop_length,
                cfg.hop_length()
            )));
        }
        if let Some(s) = spec {
            s.validate()?;
            if s.insertion.blocks_before() > cfg.n_blocks() {
                return Err(Error::InvalidArgument(format!(
                    "insertion after block {} but the generator has {} blocks",
                    s.insertion.blocks_before(),
                    cfg.n_blocks()
                )));
            }
        }

        let mut run = Run {
            store: &self.store,
            macs: 0,
            conversion_time: Duration::ZERO,
        };
        let stretch_at = spec.map(|s| s.insertion.blocks_before());
        let mut stage_lengths = Vec::with_capacity(cfg.n_blocks() + 1);

        let mut x = if stretch_at == Some(0) {
            run.stretch(mel.data().clone(), spec.unwrap())
        } else {
            Ok(mel.data().clone())
        }?;
        x = run.conv("conv_pre", &x, 1, 3)?;
        stage_lengths.push(x.ncols());

        for i in 0..cfg.n_blocks() {
            leaky_relu(&mut x, cfg.leaky_slope);
            let (u, pad) = (cfg.upsample_rates[i], cfg.upsample_padding(i));
            x = run.upsample(i, &x, u, pad)?;
            x = run.residual_stack(i, x)?;
            if stretch_at == Some(i + 1) {
                x = run.stretch(x, spec.unwrap())?;
            }
            stage_lengths.push(x.ncols());
        }

        leaky_relu(&mut x, cfg.leaky_slope);
        let y = run.conv("conv_post", &x, 1, 3)?;
        let samples: Vec<f32> = y.row(0).iter().map(|v| v.tanh()).collect();
        Ok(Synthesis {
            audio: AudioBuffer::new(samples, mel.config().sample_rate_hz)?,
            macs: run.macs,
            conversion_time: run.conversion_time,
            stage_lengths,
        })
    }
}

/// Per-call state: weights plus counters.
struct Run<'a> {
    store: &'a WeightStore,
    macs: u64,
    conversion_time: Duration,
}

impl Run<'_> {
    fn conv(
        &mut self,
        name: &str,
        x: &Array2<f32>,
        dilation: usize,
        padding: usize,
    ) -> Result<Array2<f32>> {
        let w = self.store.view3(&format!("{name}.weight"))?;
        let b = self.store.view1(&format!("{name}.bias"))?;
        let y = conv1d(x.view(), w, Some(b), 1, dilation, padding)?;
        let (c_out, c_in, k) = w.dim();
        self.macs += conv_macs(c_out, c_in, k, y.ncols());
        Ok(y)
    }

    fn upsample(
        &mut self,
        block: usize,
        x: &Array2<f32>,
        rate: usize,
        padding: usize,
    ) -> Result<Array2<f32>> {
        let w = self.store.view3(&format!("ups.{block}.weight"))?;
        let b = self.store.view1(&format!("ups.{block}.bias"))?;
        let y = transposed_conv1d(x.view(), w, Some(b), rate, padding)?;
        let (c_in, c_out, k) = w.dim();
        self.macs += conv_macs(c_out, c_in, k, x.ncols());
        Ok(y)
    }

    /// Parallel residual branches, one per kernel size, averaged.
    fn residual_stack(&mut self, block: usize, x: Array2<f32>) -> Result<Array2<f32>> {
        let cfg = self.store.config();
        let slope = cfg.leaky_slope;
        let mut sum: Option<Array2<f32>> = None;
        for (j, (&k, dilations)) in cfg
            .resblock_kernel_sizes
            .iter()
            .zip(&cfg.resblock_dilations)
            .enumerate()
        {
            let mut branch = x.clone();
            for (l, &d) in dilations.iter().enumerate() {
                let base = format!("resblocks.{block}.{j}");
                let mut t = branch.clone();
                leaky_relu(&mut t, slope);
                let mut t = self.conv(&format!("{base}.convs1.{l}"), &t, d, d * (k - 1) / 2)?;
                leaky_relu(&mut t, slope);
                let t = self.conv(&format!("{base}.convs2.{l}"), &t, 1, 0)?;
                branch += &t;
            }
            match sum.as_mut() {
                Some(s) => *s += &branch,
                None => sum = Some(branch),
            }
        }
        let mut out = sum.expect("at least one residual branch");
        out /= cfg.resblock_kernel_sizes.len() as f32;
        Ok(out)
    }

    fn stretch(&mut self, x: Array2<f32>, spec: &RateConversionSpec) -> Result<Array2<f32>> {
        let (channels, len) = x.dim();
        let start = Instant::now();
        let y = stretch_time(x.view(), spec.factor, spec.method, &spec.kaiser)?;
        self.conversion_time += start.elapsed();
        self.macs += match spec.method {
            InterpolationMethod::Linear => linear_cost(channels, len, spec.factor),
            InterpolationMethod::BandlimitedKaiser => {
                bandlimited_cost(channels, len, spec.factor, &spec.kaiser)
            }
        };
        Ok(y)
    }
}

fn leaky_relu(x: &mut Array2<f32>, slope: f32) {
    x.mapv_inplace(|v| if v >= 0.0 { v } else { v * slope });
}

/// Plain generator pass. `config` must match the store's config.
pub fn forward(
    mel: &MelSpectrogram,
    store: &WeightStore,
    config: &GeneratorConfig,
) -> Result<AudioBuffer> {
    check_config(store, config)?;
    Generator::new(store.clone())?.forward(mel)
}

/// Generator pass with the interpolation layer described by `spec`.
pub fn forward_with_rate(
    mel: &MelSpectrogram,
    spec: &RateConversionSpec,
    store: &WeightStore,
    config: &GeneratorConfig,
) -> Result<AudioBuffer> {
    check_config(store, config)?;
    Generator::new(store.clone())?.forward_with_rate(mel, spec)
}

fn check_config(store: &WeightStore, config: &GeneratorConfig) -> Result<()> {
    if store.config() != config {
        return Err(Error::Shape(
            "weight store was built for a different generator config".into(),
        ));
    }
    Ok(())
}
