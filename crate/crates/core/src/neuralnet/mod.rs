//! From-scratch neural classifiers.
//!
//! The main model convolves several window sizes over a sequence of chunk
//! embeddings, applies ReLU and max-over-time pooling per filter, drops out
//! pooled features during training, appends the scaled readability vector,
//! and classifies with a two-layer dense head. Gradients are computed by hand
//! and checked against finite differences in the tests.

pub mod adam;
pub mod checkpoint;
pub mod config;
pub mod layers;
pub mod loss;
pub mod model;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint, Checkpoint,
};
pub use config::ModelConfig;
pub use loss::{loss, loss_and_grad, softmax};
pub use model::{
    Book2VecModel, CnnModel, ForwardCache, Gradients, Input, Logits, Model, Prediction,
};
