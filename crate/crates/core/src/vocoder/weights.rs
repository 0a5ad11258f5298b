//! Generator parameters: seeded initialisation and the `RWV1` container.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! "RWV1" | u64 header length | UTF-8 JSON header | f32 payload
//! ```
//!
//! The header is `{"config": GeneratorConfig, "tensors": [{"name", "shape",
//! "dtype": "f32", "offset"}]}` with byte offsets relative to the start of
//! the payload. Tensors are stored back to back in manifest order.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{ArrayD, ArrayView1, ArrayView3, IxDyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::GeneratorConfig;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"RWV1";

/// Standard deviation of the seeded initialisation.
pub const INIT_STD: f32 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: String,
    pub offset: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    config: GeneratorConfig,
    tensors: Vec<TensorEntry>,
}

/// Every parameter name and shape the generator needs, in canonical order.
pub fn expected_manifest(config: &GeneratorConfig) -> Vec<(String, Vec<usize>)> {
    let mut m = Vec::new();
    let c0 = config.base_channels;
    m.push((
        "conv_pre.weight".to_string(),
        vec![c0, config.mel_channels, 7],
    ));
    m.push(("conv_pre.bias".to_string(), vec![c0]));
    for (i, &k) in config.upsample_kernel_sizes.iter().enumerate() {
        let (cin, cout) = (config.channels_at(i), config.channels_at(i + 1));
        m.push((format!("ups.{i}.weight"), vec![cin, cout, k]));
        m.push((format!("ups.{i}.bias"), vec![cout]));
        for (j, (&rk, dil)) in config
            .resblock_kernel_sizes
            .iter()
            .zip(&config.resblock_dilations)
            .enumerate()
        {
            for l in 0..dil.len() {
                let base = format!("resblocks.{i}.{j}");
                m.push((format!("{base}.convs1.{l}.weight"), vec![cout, cout, rk]));
                m.push((format!("{base}.convs1.{l}.bias"), vec![cout]));
                m.push((format!("{base}.convs2.{l}.weight"), vec![cout, cout, 1]));
                m.push((format!("{base}.convs2.{l}.bias"), vec![cout]));
            }
        }
    }
    let last = config.channels_at(config.n_blocks());
    m.push(("conv_post.weight".to_string(), vec![1, last, 7]));
    m.push(("conv_post.bias".to_string(), vec![1]));
    m
}

/// Named parameter tensors for one [`GeneratorConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightStore {
    config: GeneratorConfig,
    tensors: BTreeMap<String, ArrayD<f32>>,
}

/// 64-bit FNV-1a, used to derive a per-parameter random stream.
fn fnv1a64(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl WeightStore {
    /// Builds a store, checking that `tensors` match the config's manifest
    /// exactly.
    pub fn new(config: GeneratorConfig, tensors: BTreeMap<String, ArrayD<f32>>) -> Result<Self> {
        config.validate()?;
        let manifest = expected_manifest(&config);
        for (name, shape) in &manifest {
            match tensors.get(name) {
                None => return Err(Error::MissingTensor(name.clone())),
                Some(t) if t.shape() != shape.as_slice() => {
                    return Err(Error::Shape(format!(
                        "tensor `{name}` has shape {:?}, expected {shape:?}",
                        t.shape()
                    )))
                }
                Some(_) => {}
            }
        }
        if tensors.len() != manifest.len() {
            let extra = tensors
                .keys()
                .find(|k| !manifest.iter().any(|(n, _)| n == *k))
                .cloned()
                .unwrap_or_default();
            return Err(Error::UnexpectedTensor(extra));
        }
        Ok(Self { config, tensors })
    }

    /// Draws every parameter i.i.d. from `N(0, 0.01^2)`.
    ///
    /// Each tensor gets its own ChaCha8 stream: the generator is seeded with
    /// `seed` and its stream id is the FNV-1a hash of the tensor name, so a
    /// tensor's values do not depend on which other tensors exist.
    pub fn init_random(config: &GeneratorConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let normal = Normal::new(0.0f32, INIT_STD).expect("valid std");
        let tensors = expected_manifest(config)
            .into_iter()
            .map(|(name, shape)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(fnv1a64(&name));
                let n: usize = shape.iter().product();
                let data: Vec<f32> = (0..n).map(|_| normal.sample(&mut rng)).collect();
                let t = ArrayD::from_shape_vec(IxDyn(&shape), data).expect("shape matches length");
                (name, t)
            })
            .collect();
        Ok(Self {
            config: config.clone(),
            tensors,
        })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn tensors(&self) -> &BTreeMap<String, ArrayD<f32>> {
        &self.tensors
    }

    pub fn get(&self, name: &str) -> Result<&ArrayD<f32>> {
        self.tensors
            .get(name)
            .ok_or_else(|| Error::MissingTensor(name.to_string()))
    }

    pub(crate) fn view3(&self, name: &str) -> Result<ArrayView3<'_, f32>> {
        self.get(name)?
            .view()
            .into_dimensionality()
            .map_err(|e| Error::Shape(format!("{name}: {e}")))
    }

    pub(crate) fn view1(&self, name: &str) -> Result<ArrayView1<'_, f32>> {
        self.get(name)?
            .view()
            .into_dimensionality()
            .map_err(|e| Error::Shape(format!("{name}: {e}")))
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.values().map(|t| t.len()).sum()
    }

    pub fn manifest(&self) -> Vec<TensorEntry> {
        let mut offset = 0u64;
        expected_manifest(&self.config)
            .into_iter()
            .map(|(name, shape)| {
                let entry = TensorEntry {
                    name,
                    dtype: "f32".into(),
                    offset,
                    shape,
                };
                offset += 4 * entry.shape.iter().product::<usize>() as u64;
                entry
            })
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let header = Header {
            config: self.config.clone(),
            tensors: self.manifest(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        w.write_all(MAGIC).map_err(io)?;
        w.write_all(&(json.len() as u64).to_le_bytes())
            .map_err(io)?;
        w.write_all(&json).map_err(io)?;
        for entry in &header.tensors {
            for v in self.tensors[&entry.name].iter() {
                w.write_all(&v.to_le_bytes()).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::load_inner(path.as_ref(), None)
    }

    /// Loads a store and requires its header config to equal `expected`.
    /// The check happens before any payload is read.
    pub fn load_for(path: impl AsRef<Path>, expected: &GeneratorConfig) -> Result<Self> {
        Self::load_inner(path.as_ref(), Some(expected))
    }

    fn load_inner(path: &Path, expected: Option<&GeneratorConfig>) -> Result<Self> {
        let io = |e| Error::io(path, e);
        let mut r = BufReader::new(File::open(path).map_err(io)?);

        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| Error::CorruptHeader("file shorter than the magic number".into()))?;
        if &magic != MAGIC {
            return Err(Error::CorruptHeader(format!("bad magic {magic:?}")));
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len)
            .map_err(|_| Error::CorruptHeader("missing header length".into()))?;
        let header_len = u64::from_le_bytes(len);
        let mut json = Vec::new();
        (&mut r)
            .take(header_len)
            .read_to_end(&mut json)
            .map_err(io)?;
        if json.len() as u64 != header_len {
            return Err(Error::CorruptHeader(format!(
                "header declares {header_len} bytes but only {} are present",
                json.len()
            )));
        }
        let header: Header = serde_json::from_slice(&json)
            .map_err(|e| Error::CorruptHeader(format!("invalid header JSON: {e}")))?;

        if let Some(cfg) = expected {
            if *cfg != header.config {
                return Err(Error::InvalidConfig(
                    "weight file config does not match the requested generator config".into(),
                ));
            }
        }
        header.config.validate()?;
        let entries = validate_manifest(&header)?;
        let payload_len: u64 = entries
            .iter()
            .map(|e| 4 * e.shape.iter().product::<usize>() as u64)
            .sum();

        let mut payload = Vec::new();
        r.read_to_end(&mut payload).map_err(io)?;
        if (payload.len() as u64) < payload_len {
            return Err(Error::Truncated {
                expected: payload_len,
                found: payload.len() as u64,
            });
        }
        if payload.len() as u64 > payload_len {
            return Err(Error::CorruptHeader(format!(
                "{} trailing bytes after the payload",
                payload.len() as u64 - payload_len
            )));
        }

        let mut tensors = BTreeMap::new();
        for e in entries {
            let start = e.offset as usize;
            let n: usize = e.shape.iter().product();
            let data: Vec<f32> = payload[start..start + 4 * n]
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            let t = ArrayD::from_shape_vec(IxDyn(&e.shape), data).expect("length checked");
            tensors.insert(e.name.clone(), t);
        }
        Self::new(header.config, tensors)
    }
}

/// Checks the header manifest against the config and returns it in
/// canonical order.
fn validate_manifest(header: &Header) -> Result<Vec<&TensorEntry>> {
    let expected = expected_manifest(&header.config);
    let by_name: BTreeMap<&str, &TensorEntry> = header
        .tensors
        .iter()
        .map(|e| (e.name.as_str(), e))
        .collect();
    if by_name.len() != header.tensors.len() {
        return Err(Error::CorruptHeader("duplicate tensor names".into()));
    }
    let mut ordered = Vec::with_capacity(expected.len());
    for (name, shape) in &expected {
        let entry = by_name
            .get(name.as_str())
            .ok_or_else(|| Error::MissingTensor(name.clone()))?;
        if entry.shape != *shape {
            return Err(Error::Shape(format!(
                "tensor `{name}` is declared {:?}, config requires {shape:?}",
                entry.shape
            )));
        }
        if entry.dtype != "f32" {
            return Err(Error::CorruptHeader(format!(
                "tensor `{name}` has dtype {}, only f32 is supported",
                entry.dtype
            )));
        }
        ordered.push(*entry);
    }
    if let Some(extra) = header
        .tensors
        .iter()
        .find(|e| !expected.iter().any(|(n, _)| *n == e.name))
    {
        return Err(Error::UnexpectedTensor(extra.name.clone()));
    }
    let mut offset = 0u64;
    for e in &header.tensors {
        if e.offset != offset {
            return Err(Error::CorruptHeader(format!(
                "tensor `{}` at offset {}, expected {offset}",
                e.name, e.offset
            )));
        }
        offset += 4 * e.shape.iter().product::<usize>() as u64;
    }
    Ok(ordered)
}
