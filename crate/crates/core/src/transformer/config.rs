use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io_util;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub num_layers: usize,
    pub d_model: usize,
    pub num_heads: usize,
    pub d_ff: usize,
    pub max_seq_len: usize,
    pub dropout_rate: f64,
    pub src_vocab_size: usize,
    pub tgt_vocab_size: usize,
}

impl ModelConfig {
    /// Desk-scale defaults: 2 layers, d_model 64, 4 heads, d_ff 128.
    pub fn desk(src_vocab_size: usize, tgt_vocab_size: usize) -> Self {
        ModelConfig {
            num_layers: 2,
            d_model: 64,
            num_heads: 4,
            d_ff: 128,
            max_seq_len: 64,
            dropout_rate: 0.0,
            src_vocab_size,
            tgt_vocab_size,
        }
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.num_heads
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.num_layers == 0 || self.d_model == 0 || self.num_heads == 0 || self.d_ff == 0 {
            return fail(format!("layer, width and head counts must be positive: {self:?}"));
        }
        if !self.d_model.is_multiple_of(self.num_heads) {
            return fail(format!(
                "d_model {} is not divisible by num_heads {}",
                self.d_model, self.num_heads
            ));
        }
        if self.max_seq_len < 1 {
            return fail("max_seq_len must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return fail(format!("dropout_rate {} outside [0, 1)", self.dropout_rate));
        }
        if self.src_vocab_size == 0 || self.tgt_vocab_size == 0 {
            return fail("vocabulary sizes must be positive".into());
        }
        Ok(())
    }

    /// The config as `key=value` lines, in a fixed order.
    pub fn to_key_values(&self) -> String {
        format!(
            "num_layers={}\nd_model={}\nnum_heads={}\nd_ff={}\nmax_seq_len={}\ndropout_rate={:?}\nsrc_vocab_size={}\ntgt_vocab_size={}\n",
            self.num_layers,
            self.d_model,
            self.num_heads,
            self.d_ff,
            self.max_seq_len,
            self.dropout_rate,
            self.src_vocab_size,
            self.tgt_vocab_size
        )
    }

    pub(crate) fn from_map(map: &mut BTreeMap<String, String>, origin: &Path) -> Result<Self> {
        let config = ModelConfig {
            num_layers: io_util::take(map, "num_layers", origin)?,
            d_model: io_util::take(map, "d_model", origin)?,
            num_heads: io_util::take(map, "num_heads", origin)?,
            d_ff: io_util::take(map, "d_ff", origin)?,
            max_seq_len: io_util::take(map, "max_seq_len", origin)?,
            dropout_rate: io_util::take(map, "dropout_rate", origin)?,
            src_vocab_size: io_util::take(map, "src_vocab_size", origin)?,
            tgt_vocab_size: io_util::take(map, "tgt_vocab_size", origin)?,
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let ok = ModelConfig::desk(10, 12);
        assert!(ok.validate().is_ok());
        assert_eq!(ok.head_dim(), 16);
        let bad_heads = ModelConfig {
            num_heads: 3,
            ..ok.clone()
        };
        assert!(bad_heads.validate().is_err());
        let bad_len = ModelConfig {
            max_seq_len: 0,
            ..ok.clone()
        };
        assert!(bad_len.validate().is_err());
        let bad_dropout = ModelConfig {
            dropout_rate: 1.0,
            ..ok
        };
        assert!(bad_dropout.validate().is_err());
    }

    #[test]
    fn key_values_round_trip() {
        let c = ModelConfig {
            dropout_rate: 0.1,
            ..ModelConfig::desk(7, 9)
        };
        let mut map = io_util::parse_key_values(&c.to_key_values(), Path::new("c")).unwrap();
        assert_eq!(ModelConfig::from_map(&mut map, Path::new("c")).unwrap(), c);
        assert!(map.is_empty());
    }
}
