//! Named parameter collection and its inventory.
//!
//! For `L` layers, model width `d`, feed-forward width `f` and vocabulary
//! sizes `Vs`/`Vt` the inventory is:
//!
//! | path | shape |
//! |------|-------|
//! | `src_embed`, `tgt_embed` | `[Vs, d]`, `[Vt, d]` |
//! | `encoder.layer{i}.self_attn.{wq,wk,wv,wo}` | `[d, d]` |
//! | `encoder.layer{i}.self_attn.{bq,bk,bv,bo}` | `[d]` |
//! | `encoder.layer{i}.norm{1,2}.{gain,bias}` | `[d]` |
//! | `encoder.layer{i}.ffn.w1`, `.b1`, `.w2`, `.b2` | `[d, f]`, `[f]`, `[f, d]`, `[d]` |
//! | `decoder.layer{i}.{self_attn,cross_attn}.*` | as above |
//! | `decoder.layer{i}.norm{1,2,3}.{gain,bias}` | `[d]` |
//! | `decoder.layer{i}.ffn.*` | as above |
//! | `output.weight`, `output.bias` | `[d, Vt]`, `[Vt]` |

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Init {
    /// Uniform in ±sqrt(6 / (fan_in + fan_out)).
    Glorot,
    /// Uniform in ±1/sqrt(d_model); rows are scaled by sqrt(d_model) on lookup.
    Embedding,
    Zeros,
    Ones,
}

fn attention_entries(prefix: &str, d: usize, out: &mut Vec<(String, Vec<usize>, Init)>) {
    for w in ["wq", "wk", "wv", "wo"] {
        out.push((format!("{prefix}.{w}"), vec![d, d], Init::Glorot));
    }
    for b in ["bq", "bk", "bv", "bo"] {
        out.push((format!("{prefix}.{b}"), vec![d], Init::Zeros));
    }
}

fn norm_entries(prefix: &str, d: usize, out: &mut Vec<(String, Vec<usize>, Init)>) {
    out.push((format!("{prefix}.gain"), vec![d], Init::Ones));
    out.push((format!("{prefix}.bias"), vec![d], Init::Zeros));
}

fn ffn_entries(prefix: &str, d: usize, f: usize, out: &mut Vec<(String, Vec<usize>, Init)>) {
    out.push((format!("{prefix}.w1"), vec![d, f], Init::Glorot));
    out.push((format!("{prefix}.b1"), vec![f], Init::Zeros));
    out.push((format!("{prefix}.w2"), vec![f, d], Init::Glorot));
    out.push((format!("{prefix}.b2"), vec![d], Init::Zeros));
}

fn inventory_with_init(config: &ModelConfig) -> Vec<(String, Vec<usize>, Init)> {
    let d = config.d_model;
    let f = config.d_ff;
    let mut out = vec![
        ("src_embed".to_owned(), vec![config.src_vocab_size, d], Init::Embedding),
        ("tgt_embed".to_owned(), vec![config.tgt_vocab_size, d], Init::Embedding),
    ];
    for i in 0..config.num_layers {
        let p = format!("encoder.layer{i}");
        attention_entries(&format!("{p}.self_attn"), d, &mut out);
        norm_entries(&format!("{p}.norm1"), d, &mut out);
        ffn_entries(&format!("{p}.ffn"), d, f, &mut out);
        norm_entries(&format!("{p}.norm2"), d, &mut out);
    }
    for i in 0..config.num_layers {
        let p = format!("decoder.layer{i}");
        attention_entries(&format!("{p}.self_attn"), d, &mut out);
        norm_entries(&format!("{p}.norm1"), d, &mut out);
        attention_entries(&format!("{p}.cross_attn"), d, &mut out);
        norm_entries(&format!("{p}.norm2"), d, &mut out);
        ffn_entries(&format!("{p}.ffn"), d, f, &mut out);
        norm_entries(&format!("{p}.norm3"), d, &mut out);
    }
    out.push(("output.weight".to_owned(), vec![d, config.tgt_vocab_size], Init::Glorot));
    out.push(("output.bias".to_owned(), vec![config.tgt_vocab_size], Init::Zeros));
    out
}

/// Every parameter path with its shape for `config`, in construction order.
pub fn inventory(config: &ModelConfig) -> Vec<(String, Vec<usize>)> {
    inventory_with_init(config)
        .into_iter()
        .map(|(name, shape, _)| (name, shape))
        .collect()
}

/// Parameter tensors keyed by path. Gradients and optimizer moments use
/// the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    tensors: BTreeMap<String, Tensor>,
}

impl Parameters {
    /// Draws fresh parameters for `config` from a seeded generator.
    pub fn init(config: &ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tensors = BTreeMap::new();
        for (name, shape, init) in inventory_with_init(config) {
            let n: usize = shape.iter().product();
            let data: Vec<f64> = match init {
                Init::Zeros => vec![0.0; n],
                Init::Ones => vec![1.0; n],
                Init::Glorot => {
                    let limit = (6.0 / (shape[0] + shape[1]) as f64).sqrt();
                    (0..n).map(|_| rng.random_range(-limit..limit)).collect()
                }
                Init::Embedding => {
                    let limit = 1.0 / (config.d_model as f64).sqrt();
                    (0..n).map(|_| rng.random_range(-limit..limit)).collect()
                }
            };
            tensors.insert(name, Tensor::new(shape, data)?);
        }
        Ok(Parameters { tensors })
    }

    /// Zero tensors matching `config`'s inventory.
    pub fn zeros(config: &ModelConfig) -> Self {
        Parameters {
            tensors: inventory(config)
                .into_iter()
                .map(|(name, shape)| (name, Tensor::zeros(shape)))
                .collect(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Parameters {
            tensors: self
                .tensors
                .iter()
                .map(|(k, t)| (k.clone(), Tensor::zeros(t.shape().to_vec())))
                .collect(),
        }
    }

    pub(crate) fn from_map(tensors: BTreeMap<String, Tensor>) -> Self {
        Parameters { tensors }
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.tensors.get_mut(name)
    }

    pub(crate) fn slice(&self, name: &str) -> &[f64] {
        self.tensors
            .get(name)
            .unwrap_or_else(|| panic!("missing parameter {name}"))
            .data()
    }

    pub(crate) fn slice_mut(&mut self, name: &str) -> &mut [f64] {
        self.tensors
            .get_mut(name)
            .unwrap_or_else(|| panic!("missing parameter {name}"))
            .data_mut()
    }

    pub(crate) fn take(&mut self, name: &str) -> Tensor {
        self.tensors
            .remove(name)
            .unwrap_or_else(|| panic!("missing parameter {name}"))
    }

    pub(crate) fn put(&mut self, name: String, tensor: Tensor) {
        self.tensors.insert(name, tensor);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor)> {
        self.tensors.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn num_values(&self) -> usize {
        self.tensors.values().map(Tensor::len).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.values().all(Tensor::is_finite)
    }

    /// Checks that paths and shapes are exactly the inventory of `config`.
    pub fn check_against(&self, config: &ModelConfig) -> Result<()> {
        let expected = inventory(config);
        if expected.len() != self.tensors.len() {
            return Err(Error::Shape(format!(
                "expected {} parameter tensors, found {}",
                expected.len(),
                self.tensors.len()
            )));
        }
        for (name, shape) in expected {
            match self.tensors.get(&name) {
                None => return Err(Error::Shape(format!("missing parameter {name}"))),
                Some(t) if t.shape() != shape.as_slice() => {
                    return Err(Error::Shape(format!(
                        "parameter {name} has shape {:?}, expected {shape:?}",
                        t.shape()
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// `self += scale * other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &Parameters, scale: f64) {
        for (name, t) in self.tensors.iter_mut() {
            let o = other.slice(name);
            for (a, b) in t.data_mut().iter_mut().zip(o) {
                *a += scale * b;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors.values_mut() {
            for v in t.data_mut() {
                *v *= factor;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ModelConfig {
        ModelConfig {
            num_layers: 2,
            d_model: 8,
            num_heads: 2,
            d_ff: 16,
            max_seq_len: 10,
            dropout_rate: 0.0,
            src_vocab_size: 11,
            tgt_vocab_size: 13,
        }
    }

    #[test]
    fn inventory_is_complete_and_unique() {
        let config = tiny();
        let inv = inventory(&config);
        // 2 embeddings + per encoder layer (8 attn + 4 norm + 4 ffn)
        // + per decoder layer (16 attn + 6 norm + 4 ffn) + 2 output
        assert_eq!(inv.len(), 2 + 2 * 16 + 2 * 26 + 2);
        let params = Parameters::init(&config, 7).unwrap();
        assert_eq!(params.len(), inv.len());
        params.check_against(&config).unwrap();
        assert!(params.get("decoder.layer1.cross_attn.wq").is_some());
        assert!(params.get("decoder.layer2.cross_attn.wq").is_none());
    }

    #[test]
    fn init_is_seeded() {
        let a = Parameters::init(&tiny(), 1).unwrap();
        let b = Parameters::init(&tiny(), 1).unwrap();
        let c = Parameters::init(&tiny(), 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let limit = (6.0f64 / 16.0).sqrt();
        assert!(a.slice("encoder.layer0.self_attn.wq").iter().all(|v| v.abs() < limit));
        assert!(a.slice("encoder.layer0.norm1.gain").iter().all(|&v| v == 1.0));
    }

    #[test]
    fn check_against_detects_mismatch() {
        let params = Parameters::init(&tiny(), 1).unwrap();
        let other = ModelConfig {
            tgt_vocab_size: 14,
            ..tiny()
        };
        assert!(params.check_against(&other).is_err());
    }
}
