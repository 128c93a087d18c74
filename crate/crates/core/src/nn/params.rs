use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

use super::tape::Tensor;

/// Residual MLP over flat vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub width: usize,
    pub layers: usize,
    pub fourier_k: usize,
    /// Number of class labels; 0 disables conditioning.
    pub label_vocab: usize,
    pub label_dim: usize,
    /// Fixed affine map applied to the inputs before the first layer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_norm: Option<InputNorm>,
}

/// Inputs become `(x - shift) / scale`, feature by feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputNorm {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

/// Post-norm transformer over a set of points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformerSpec {
    pub point_dim: usize,
    pub embed_dim: usize,
    pub heads: usize,
    pub blocks: usize,
    pub ff_dim: usize,
    pub fourier_k: usize,
    pub label_vocab: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Architecture {
    Mlp(MlpSpec),
    Transformer(TransformerSpec),
}

impl MlpSpec {
    pub fn input_width(&self) -> usize {
        self.input_dim + super::layers::time_width(self.fourier_k) + if self.label_vocab > 0 { self.label_dim } else { 0 }
    }
}

impl Architecture {
    /// Every slot with its shape, in canonical order.
    pub fn slot_shapes(&self) -> Vec<(String, (usize, usize))> {
        let mut out = Vec::new();
        let mut push = |name: String, r: usize, c: usize| out.push((name, (r, c)));
        match self {
            Architecture::Mlp(s) => {
                let w = s.width;
                if s.label_vocab > 0 {
                    push("label.emb".into(), s.label_vocab, s.label_dim);
                }
                push("in.w".into(), s.input_width(), w);
                push("in.b".into(), 1, w);
                push("in.ln.g".into(), 1, w);
                push("in.ln.b".into(), 1, w);
                for l in 0..s.layers.saturating_sub(1) {
                    push(format!("hidden{l}.w"), w, w);
                    push(format!("hidden{l}.b"), 1, w);
                    push(format!("hidden{l}.ln.g"), 1, w);
                    push(format!("hidden{l}.ln.b"), 1, w);
                }
                push("out.w".into(), w, s.output_dim);
                push("out.b".into(), 1, s.output_dim);
            }
            Architecture::Transformer(s) => {
                let e = s.embed_dim;
                if s.label_vocab > 0 {
                    push("label.emb".into(), s.label_vocab, e);
                }
                push("embed.w".into(), s.point_dim, e);
                push("embed.b".into(), 1, e);
                push("time.w".into(), super::layers::time_width(s.fourier_k), e);
                push("time.b".into(), 1, e);
                for b in 0..s.blocks {
                    for p in ["q", "k", "v", "o"] {
                        push(format!("block{b}.attn.{p}.w"), e, e);
                        push(format!("block{b}.attn.{p}.b"), 1, e);
                    }
                    push(format!("block{b}.ln1.g"), 1, e);
                    push(format!("block{b}.ln1.b"), 1, e);
                    push(format!("block{b}.ff1.w"), e, s.ff_dim);
                    push(format!("block{b}.ff1.b"), 1, s.ff_dim);
                    push(format!("block{b}.ff2.w"), s.ff_dim, e);
                    push(format!("block{b}.ff2.b"), 1, e);
                    push(format!("block{b}.ln2.g"), 1, e);
                    push(format!("block{b}.ln2.b"), 1, e);
                }
                push("out.w".into(), e, s.point_dim);
                push("out.b".into(), 1, s.point_dim);
            }
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.slot_shapes().iter().map(|(_, (r, c))| r * c).sum()
    }
}

/// Named tensors of one network.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    name: String,
    arch: Option<Architecture>,
    slots: BTreeMap<String, Tensor>,
}

impl ModelParams {
    /// Random initialization: He-normal weights for layers feeding a ReLU,
    /// Glorot-normal elsewhere, zero biases, unit norm gains and a zero
    /// output projection so the untrained field is identically zero.
    pub fn init(name: &str, arch: Architecture, rng: &mut impl Rng) -> Self {
        let mut slots = BTreeMap::new();
        for (slot, (r, c)) in arch.slot_shapes() {
            let t = if slot.starts_with("out.") || slot.ends_with(".b") {
                Matrix::zeros(r, c)
            } else if slot.ends_with(".g") {
                Matrix::filled(r, c, 1.0)
            } else if slot == "label.emb" {
                normal_matrix(rng, r, c, 1.0)
            } else if slot.contains(".attn.") || slot.starts_with("embed") || slot.starts_with("time") {
                normal_matrix(rng, r, c, (2.0 / (r + c) as f64).sqrt())
            } else {
                normal_matrix(rng, r, c, (2.0 / r as f64).sqrt())
            };
            slots.insert(slot, t);
        }
        ModelParams {
            name: name.to_string(),
            arch: Some(arch),
            slots,
        }
    }

    /// Bare slot collection without an architecture.
    pub fn from_slots(slots: impl IntoIterator<Item = (String, Tensor)>) -> Self {
        ModelParams {
            name: String::new(),
            arch: None,
            slots: slots.into_iter().collect(),
        }
    }

    pub(crate) fn from_parts(name: String, arch: Architecture, slots: BTreeMap<String, Tensor>) -> Self {
        ModelParams {
            name,
            arch: Some(arch),
            slots,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Key prefix used on a shared tape.
    pub fn prefix(&self) -> String {
        if self.name.is_empty() {
            String::new()
        } else {
            format!("{}/", self.name)
        }
    }

    pub fn arch(&self) -> &Architecture {
        self.arch.as_ref().expect("model has no architecture")
    }

    pub fn get(&self, slot: &str) -> Option<&Tensor> {
        self.slots.get(slot)
    }

    pub fn get_mut(&mut self, slot: &str) -> Option<&mut Tensor> {
        self.slots.get_mut(slot)
    }

    pub fn slots(&self) -> &BTreeMap<String, Tensor> {
        &self.slots
    }

    pub fn slots_mut(&mut self) -> impl Iterator<Item = (&String, &mut Tensor)> {
        self.slots.iter_mut()
    }

    pub fn parameter_count(&self) -> usize {
        self.slots.values().map(|t| t.data().len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.slots.values().all(|t| t.is_finite())
    }
}

pub(crate) fn normal_matrix(rng: &mut impl Rng, r: usize, c: usize, std: f64) -> Matrix {
    let n = Normal::new(0.0, std).expect("finite std");
    Matrix::new(r, c, (0..r * c).map(|_| n.sample(rng)).collect())
}
