use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Architecture of the HiFi-GAN-style generator.
///
/// Channel width halves after every upsampling block, and the product of
/// the upsampling rates equals the mel hop length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub mel_channels: usize,
    pub base_channels: usize,
    pub upsample_rates: Vec<usize>,
    pub upsample_kernel_sizes: Vec<usize>,
    pub resblock_kernel_sizes: Vec<usize>,
    pub resblock_dilations: Vec<Vec<usize>>,
    pub leaky_slope: f32,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            mel_channels: 80,
            base_channels: 128,
            upsample_rates: vec![8, 8, 2, 2],
            upsample_kernel_sizes: vec![16, 16, 4, 4],
            resblock_kernel_sizes: vec![3, 7, 11],
            resblock_dilations: vec![vec![1, 3, 5]; 3],
            leaky_slope: 0.1,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.mel_channels == 0 || self.base_channels == 0 {
            return bad("channel counts must be positive".into());
        }
        if self.upsample_rates.is_empty() {
            return bad("at least one upsampling block is required".into());
        }
        if self.upsample_rates.len() != self.upsample_kernel_sizes.len() {
            return bad(format!(
                "{} upsample rates but {} upsample kernel sizes",
                self.upsample_rates.len(),
                self.upsample_kernel_sizes.len()
            ));
        }
        for (i, (&u, &k)) in self
            .upsample_rates
            .iter()
            .zip(&self.upsample_kernel_sizes)
            .enumerate()
        {
            if u == 0 || k < u || (k - u) % 2 != 0 {
                return bad(format!(
                    "upsample block {i}: kernel {k} must be >= rate {u} with an even difference"
                ));
            }
        }
        if self.base_channels >> self.upsample_rates.len() == 0 {
            return bad(format!(
                "{} base channels cannot be halved {} times",
                self.base_channels,
                self.upsample_rates.len()
            ));
        }
        if self.resblock_kernel_sizes.is_empty()
            || self.resblock_kernel_sizes.len() != self.resblock_dilations.len()
        {
            return bad("need one dilation list per residual kernel size".into());
        }
        for (&k, dil) in self
            .resblock_kernel_sizes
            .iter()
            .zip(&self.resblock_dilations)
        {
            if k % 2 == 0 || dil.is_empty() || dil.contains(&0) {
                return bad(format!(
                    "residual kernel {k} must be odd with nonempty, positive dilations"
                ));
            }
        }
        if !(self.leaky_slope.is_finite()) {
            return bad("leaky slope must be finite".into());
        }
        Ok(())
    }

    pub fn n_blocks(&self) -> usize {
        self.upsample_rates.len()
    }

    /// Channel count entering upsampling block `i` (and leaving block `i - 1`).
    pub fn channels_at(&self, i: usize) -> usize {
        self.base_channels >> i
    }

    /// Total upsampling of the first `blocks` blocks.
    pub fn upsampling_through(&self, blocks: usize) -> usize {
        self.upsample_rates[..blocks].iter().product()
    }

    /// Output samples per mel frame.
    pub fn hop_length(&self) -> usize {
        self.upsampling_through(self.n_blocks())
    }

    pub fn upsample_padding(&self, i: usize) -> usize {
        (self.upsample_kernel_sizes[i] - self.upsample_rates[i]) / 2
    }
}
