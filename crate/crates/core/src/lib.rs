//! Predicting the success of books from their text.
//!
//! The crate fuses a 1-D convolutional classifier over chunk-averaged sentence
//! embeddings with five classical readability indices (Flesch reading ease,
//! Flesch-Kincaid grade, SMOG, Coleman-Liau and the automated readability
//! index). Everything needed to go from a manifest of plain-text books to a
//! trained model, evaluation reports, significance tests and readability
//! attributions lives here:
//!
//! - [`corpus`]: manifests, success labels, train/validation splits, section selection
//! - [`textstats`]: sentence segmentation, tokenization, syllable counting
//! - [`readability`]: the five indices and the z-score scaler
//! - [`embedding`]: hashed bag-of-words encoder, the `SEMB` file format, chunk averaging
//! - [`neuralnet`]: the CNN and Book2Vec models, backprop, Adam, checkpoints
//! - [`pipeline`]: featurization, training with model selection, metrics,
//!   McNemar test, baselines, attribution and vector export
//! - [`synthetic`]: generated corpora with planted signal, for testing

pub mod corpus;
pub mod embedding;
pub mod error;
pub mod neuralnet;
pub mod pipeline;
pub mod readability;
pub mod synthetic;
pub mod textstats;

mod rng;

pub use corpus::{BookRecord, CorpusSet, Genre, SectionSpec, SuccessLabel};
pub use embedding::{ChunkSequence, SentenceEmbeddingMatrix};
pub use error::{Error, Result};
pub use neuralnet::{AdamConfig, AdamState, Model, ModelConfig};
pub use pipeline::{EvalReport, TrainConfig};
pub use readability::{ReadabilityScaler, ReadabilityVector};
pub use textstats::TextCounts;
