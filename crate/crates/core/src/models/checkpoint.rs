//! Binary checkpoint container.
//!
//! Layout: magic `EVLC`, little-endian `u32` version, `u64` header length,
//! JSON header, raw little-endian tensor data in header order, and a
//! SHA-256 digest of all preceding bytes.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ArchConfig, Architecture, LinkerModel, ModelError, Prediction};
use crate::corpus::AnnotatedSentence;
use crate::features::{EmbeddingTable, FeatureConfig, TagInventory};
use crate::nn::{DType, Real};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"EVLC";
pub const CHECKPOINT_VERSION: u32 = 1;

const DIGEST_LEN: usize = 32;
const PREFIX_LEN: usize = 4 + 4 + 8;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    arch: ArchConfig,
    features: FeatureConfig,
    inventory: TagInventory,
    threshold: f64,
    dtype: DType,
    rng_seed: u64,
    tensors: Vec<TensorEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
}

fn element_size(dtype: DType) -> usize {
    match dtype {
        DType::F32 => 4,
        DType::F64 => 8,
    }
}

impl<T: Real> LinkerModel<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            arch: self.arch,
            features: self.features,
            inventory: self.inventory.clone(),
            threshold: self.threshold,
            dtype: T::DTYPE,
            rng_seed: self.params.rng_seed,
            tensors: self
                .params
                .ids()
                .map(|id| {
                    let v = self.params.value(id);
                    TensorEntry {
                        name: self.params.name(id).to_string(),
                        rows: v.rows(),
                        cols: v.cols(),
                    }
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(PREFIX_LEN + json.len() + self.params.num_scalars() * 8 + DIGEST_LEN);
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for m in self.params.values() {
            T::write_le(m.as_slice(), &mut out);
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    /// Decodes a checkpoint written with the same element type.
    pub fn from_bytes(bytes: &[u8], embeddings: Arc<EmbeddingTable>) -> Result<Self, ModelError> {
        let (header, data) = parse(bytes)?;
        if header.dtype != T::DTYPE {
            return Err(ModelError::DType {
                found: header.dtype.name().into(),
                expected: T::DTYPE.name().into(),
            });
        }
        build(header, data, embeddings)
    }
}

fn parse(bytes: &[u8]) -> Result<(Header, &[u8]), ModelError> {
    let corrupt = |m: &str| ModelError::Corrupt(m.to_string());
    if bytes.len() < 4 || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(corrupt("not a checkpoint file (bad magic)"));
    }
    if bytes.len() < 8 {
        return Err(corrupt("truncated before version"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(ModelError::Version {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    if bytes.len() < PREFIX_LEN + DIGEST_LEN {
        return Err(corrupt("truncated file"));
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err(corrupt("checksum mismatch (file truncated or modified)"));
    }
    let header_len = u64::from_le_bytes(body[8..16].try_into().unwrap()) as usize;
    let rest = &body[PREFIX_LEN..];
    if header_len > rest.len() {
        return Err(corrupt("header length exceeds file size"));
    }
    let header: Header =
        serde_json::from_slice(&rest[..header_len]).map_err(|e| ModelError::Corrupt(format!("bad header: {e}")))?;
    let data = &rest[header_len..];
    let expected: usize = header.tensors.iter().map(|t| t.rows * t.cols).sum::<usize>() * element_size(header.dtype);
    if data.len() != expected {
        return Err(ModelError::Corrupt(format!(
            "tensor data is {} bytes, header describes {expected}",
            data.len()
        )));
    }
    Ok((header, data))
}

fn build<T: Real>(header: Header, data: &[u8], embeddings: Arc<EmbeddingTable>) -> Result<LinkerModel<T>, ModelError> {
    let mut model = LinkerModel::<T>::new(header.arch, header.features, header.inventory, embeddings, header.rng_seed)?;
    if !(header.threshold > 0.0 && header.threshold < 1.0) {
        return Err(ModelError::Corrupt(format!("threshold {} outside (0, 1)", header.threshold)));
    }
    model.threshold = header.threshold;
    if header.tensors.len() != model.params.len() {
        return Err(ModelError::Corrupt(format!(
            "{} tensors stored, architecture has {}",
            header.tensors.len(),
            model.params.len()
        )));
    }
    let size = element_size(header.dtype);
    let mut offset = 0;
    for entry in &header.tensors {
        let id = model
            .params
            .find(&entry.name)
            .ok_or_else(|| ModelError::Corrupt(format!("unknown tensor {}", entry.name)))?;
        let dst = model.params.value_mut(id);
        if dst.shape() != (entry.rows, entry.cols) {
            return Err(ModelError::Corrupt(format!(
                "tensor {} is {}x{}, architecture needs {}x{}",
                entry.name,
                entry.rows,
                entry.cols,
                dst.rows(),
                dst.cols()
            )));
        }
        let n = entry.rows * entry.cols * size;
        dst.as_mut_slice().copy_from_slice(&T::read_le(&data[offset..offset + n]));
        offset += n;
    }
    Ok(model)
}

/// Feature configuration stored in a checkpoint, read without building the model.
pub fn checkpoint_features(bytes: &[u8]) -> Result<FeatureConfig, ModelError> {
    parse(bytes).map(|(h, _)| h.features)
}

pub fn save_checkpoint<T: Real>(model: &LinkerModel<T>, path: impl AsRef<Path>) -> Result<(), ModelError> {
    fs::write(path, model.to_bytes())?;
    Ok(())
}

/// Loads a checkpoint of either precision. The embedding table is supplied
/// by the caller and must match the stored feature configuration.
pub fn load_checkpoint(path: impl AsRef<Path>, embeddings: Arc<EmbeddingTable>) -> Result<AnyLinker, ModelError> {
    AnyLinker::from_bytes(&fs::read(path)?, embeddings)
}

/// A loaded model of either element type.
#[derive(Debug, Clone)]
pub enum AnyLinker {
    F32(LinkerModel<f32>),
    F64(LinkerModel<f64>),
}

macro_rules! each {
    ($self:expr, $m:ident => $body:expr) => {
        match $self {
            AnyLinker::F32($m) => $body,
            AnyLinker::F64($m) => $body,
        }
    };
}

impl AnyLinker {
    pub fn from_bytes(bytes: &[u8], embeddings: Arc<EmbeddingTable>) -> Result<Self, ModelError> {
        let (header, data) = parse(bytes)?;
        Ok(match header.dtype {
            DType::F32 => AnyLinker::F32(build(header, data, embeddings)?),
            DType::F64 => AnyLinker::F64(build(header, data, embeddings)?),
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        each!(self, m => m.to_bytes())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn predict(&self, s: &AnnotatedSentence, verb_index: usize) -> Result<Prediction, ModelError> {
        each!(self, m => m.predict(s, verb_index))
    }

    pub fn architecture(&self) -> Architecture {
        each!(self, m => m.architecture())
    }

    pub fn features(&self) -> &FeatureConfig {
        each!(self, m => &m.features)
    }

    pub fn threshold(&self) -> f64 {
        each!(self, m => m.threshold)
    }

    pub fn set_threshold(&mut self, threshold: f64) {
        each!(self, m => m.threshold = threshold)
    }

    pub fn dtype(&self) -> DType {
        match self {
            AnyLinker::F32(_) => DType::F32,
            AnyLinker::F64(_) => DType::F64,
        }
    }

    pub fn num_parameters(&self) -> usize {
        each!(self, m => m.num_parameters())
    }
}

impl From<LinkerModel<f32>> for AnyLinker {
    fn from(m: LinkerModel<f32>) -> Self {
        AnyLinker::F32(m)
    }
}

impl From<LinkerModel<f64>> for AnyLinker {
    fn from(m: LinkerModel<f64>) -> Self {
        AnyLinker::F64(m)
    }
}
