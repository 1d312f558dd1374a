//! A small Transformer encoder-decoder in double precision with
//! hand-derived gradients.

mod attention;
pub mod checkpoint;
mod config;
pub mod decode;
mod model;
mod optim;
mod params;
mod tensor;

pub use attention::{attention_weights, multi_head_attention, scaled_dot_attention, AttentionParams};
pub use config::ModelConfig;
pub use decode::{beam_decode, beam_search, greedy_decode, greedy_search, Hypothesis, StepScorer, TransformerScorer};
pub use model::{
    attention_maps, backward, backward_with, batch_loss, encode_source, forward, loss, next_token_log_probs,
    positional_encoding, Batch, EncodedSource, Gradients, Mode,
};
pub use optim::{train_step, AdamHyper, AdamState};
pub use params::{inventory, Parameters};
pub use tensor::Tensor;
