//! Binary checkpoint container.
//!
//! Layout: the 8-byte magic `WFMCKPT\0`, a little-endian `u32` format
//! version, a little-endian `u64` header length, a UTF-8 JSON header, then
//! every tensor as little-endian `f64` in header order.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::params::{Architecture, ModelParams};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"WFMCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SlotHeader {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    name: String,
    arch: Architecture,
    slots: Vec<SlotHeader>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    models: Vec<ModelHeader>,
    meta: serde_json::Value,
}

/// Networks plus free-form metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub models: Vec<ModelParams>,
    pub meta: serde_json::Value,
}

impl Checkpoint {
    pub fn new(models: Vec<ModelParams>, meta: serde_json::Value) -> Self {
        Checkpoint { models, meta }
    }

    pub fn model(&self, name: &str) -> Option<&ModelParams> {
        self.models.iter().find(|m| m.name() == name)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            models: self
                .models
                .iter()
                .map(|m| ModelHeader {
                    name: m.name().to_string(),
                    arch: m.arch().clone(),
                    slots: m
                        .slots()
                        .iter()
                        .map(|(name, t)| SlotHeader {
                            name: name.clone(),
                            rows: t.rows(),
                            cols: t.cols(),
                        })
                        .collect(),
                })
                .collect(),
            meta: self.meta.clone(),
        };
        let json = serde_json::to_vec(&header)?;
        let floats: usize = self.models.iter().map(|m| m.parameter_count()).sum();
        let mut out = Vec::with_capacity(20 + json.len() + 8 * floats);
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for m in &self.models {
            for t in m.slots().values() {
                for v in t.data() {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Checkpoint(msg.to_string());
        if bytes.len() < 20 || &bytes[..8] != CHECKPOINT_MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
        }
        let hlen = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
        let body = bytes.get(20..20 + hlen).ok_or_else(|| bad("truncated header"))?;
        let header: Header = serde_json::from_slice(body)?;
        let mut pos = 20 + hlen;
        let mut models = Vec::with_capacity(header.models.len());
        for mh in header.models {
            let expected: BTreeMap<String, (usize, usize)> = mh.arch.slot_shapes().into_iter().collect();
            let mut slots = BTreeMap::new();
            for sh in mh.slots {
                if expected.get(&sh.name) != Some(&(sh.rows, sh.cols)) {
                    return Err(Error::Checkpoint(format!(
                        "slot `{}` of model `{}` does not match its architecture",
                        sh.name, mh.name
                    )));
                }
                let n = sh.rows * sh.cols;
                let raw = bytes.get(pos..pos + 8 * n).ok_or_else(|| bad("truncated tensor data"))?;
                let data = raw
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect();
                pos += 8 * n;
                slots.insert(sh.name, Matrix::new(sh.rows, sh.cols, data));
            }
            if slots.len() != expected.len() {
                return Err(Error::Checkpoint(format!("model `{}` is missing slots", mh.name)));
            }
            models.push(ModelParams::from_parts(mh.name, mh.arch, slots));
        }
        if pos != bytes.len() {
            return Err(bad("trailing bytes after tensor data"));
        }
        Ok(Checkpoint {
            models,
            meta: header.meta,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::params::{MlpSpec, TransformerSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> Checkpoint {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mlp = Architecture::Mlp(MlpSpec {
            input_dim: 5,
            output_dim: 2,
            width: 6,
            layers: 2,
            fourier_k: 2,
            label_vocab: 2,
            label_dim: 3,
            input_norm: None,
        });
        let tf = Architecture::Transformer(TransformerSpec {
            point_dim: 2,
            embed_dim: 4,
            heads: 2,
            blocks: 1,
            ff_dim: 4,
            fourier_k: 1,
            label_vocab: 0,
        });
        let mut a = ModelParams::init("mean", mlp, &mut rng);
        // exercise odd bit patterns
        a.get_mut("out.b").unwrap().data_mut()[0] = -0.0;
        a.get_mut("out.b").unwrap().data_mut()[1] = f64::MIN_POSITIVE / 3.0;
        let b = ModelParams::init("pc", tf, &mut rng);
        Checkpoint::new(vec![a, b], serde_json::json!({"geometry": "bw", "steps": 3}))
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let ck = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        ck.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back.meta, ck.meta);
        for (x, y) in ck.models.iter().zip(&back.models) {
            assert_eq!(x.name(), y.name());
            assert_eq!(x.arch(), y.arch());
            for (s, t) in x.slots() {
                let u = y.get(s).unwrap();
                let bits = |m: &Matrix| m.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(t), bits(u), "{s}");
            }
        }
        assert_eq!(back.to_bytes().unwrap(), ck.to_bytes().unwrap());
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let bytes = sample().to_bytes().unwrap();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 4]).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(matches!(Checkpoint::from_bytes(&wrong), Err(Error::Checkpoint(_))));
        let mut ver = bytes;
        ver[8] = 9;
        assert!(matches!(Checkpoint::from_bytes(&ver), Err(Error::Checkpoint(_))));
    }
}
