//! End-to-end workflow: featurize books, train with validation-based model
//! selection, evaluate, compare classifiers, attribute predictions to the
//! readability indices, and export book vectors.

mod attribution;
mod baseline;
mod export;
mod features;
mod mcnemar;
mod metrics;
mod train;

use std::path::PathBuf;

pub use attribution::{
    attribute_readability, attribute_samples, readability_gradient, AttributionReport,
    AttributionTarget,
};
pub use baseline::{majority_baseline, MajorityBaseline};
pub use export::{book_vectors, book_vectors_csv, export_book_vectors, write_book_vectors};
pub use features::{featurize_book, featurize_corpus, prepare_samples, BookFeatures, Sample};
pub use mcnemar::{chi_square_sf, mcnemar, McNemarResult};
pub use metrics::{
    evaluate, evaluate_predictions, predictions_csv, read_predictions, weighted_f1,
    write_predictions, Confusion, EvalReport, PredictionRecord,
};
pub use train::{train, train_with_progress, EpochRecord, TrainOutcome, Trainer};

use crate::corpus::SectionSpec;
use crate::embedding::DEFAULT_DIM;
use crate::error::{Error, Result};
use crate::neuralnet::model::DEFAULT_BOOK2VEC_HIDDEN;
use crate::neuralnet::{AdamConfig, ModelConfig};
use crate::readability::ReadabilityOptions;

/// Where sentence embeddings come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncoderConfig {
    HashedBow {
        dim: usize,
        seed: u64,
    },
    /// `<dir>/<book_id>.semb`, one row per segmented sentence of the full book.
    ExternalSemb {
        dir: PathBuf,
    },
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig::HashedBow {
            dim: DEFAULT_DIM,
            seed: 0,
        }
    }
}

/// Everything that turns a book's text into model inputs. Stored in
/// checkpoints so evaluation featurizes exactly like training did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureConfig {
    pub section: SectionSpec,
    pub n_chunks: usize,
    pub encoder: EncoderConfig,
    pub readability: ReadabilityOptions,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            section: SectionSpec::FirstK(1000),
            n_chunks: 50,
            encoder: EncoderConfig::default(),
            readability: ReadabilityOptions::default(),
        }
    }
}

impl FeatureConfig {
    pub fn to_metadata(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("section".to_string(), self.section.to_string()),
            ("n_chunks".to_string(), self.n_chunks.to_string()),
        ];
        match &self.encoder {
            EncoderConfig::HashedBow { dim, seed } => {
                kv.push(("encoder".into(), "hashed".into()));
                kv.push(("encoder.dim".into(), dim.to_string()));
                kv.push(("encoder.seed".into(), seed.to_string()));
            }
            EncoderConfig::ExternalSemb { dir } => {
                kv.push(("encoder".into(), "semb".into()));
                kv.push(("encoder.dir".into(), dir.to_string_lossy().into_owned()));
            }
        }
        kv.push((
            "readability.fkg_paper_sign".into(),
            self.readability.fkg_paper_sign.to_string(),
        ));
        kv
    }

    pub fn from_metadata(kv: &[(String, String)]) -> Result<Self> {
        let get = |k: &str| {
            kv.iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Checkpoint(format!("missing featurization key {k}")))
        };
        let bad = |k: &str, v: &str| Error::Checkpoint(format!("bad value for {k}: {v:?}"));
        let section = get("section")?.parse()?;
        let n_chunks = get("n_chunks")?;
        let n_chunks = n_chunks.parse().map_err(|_| bad("n_chunks", n_chunks))?;
        let encoder = match get("encoder")? {
            "hashed" => {
                let dim = get("encoder.dim")?;
                let seed = get("encoder.seed")?;
                EncoderConfig::HashedBow {
                    dim: dim.parse().map_err(|_| bad("encoder.dim", dim))?,
                    seed: seed.parse().map_err(|_| bad("encoder.seed", seed))?,
                }
            }
            "semb" => EncoderConfig::ExternalSemb {
                dir: PathBuf::from(get("encoder.dir")?),
            },
            other => return Err(bad("encoder", other)),
        };
        let sign = get("readability.fkg_paper_sign")?;
        Ok(Self {
            section,
            n_chunks,
            encoder,
            readability: ReadabilityOptions {
                fkg_paper_sign: sign
                    .parse()
                    .map_err(|_| bad("readability.fkg_paper_sign", sign))?,
            },
        })
    }
}

/// CNN hyperparameters; input width and chunk count come from featurization.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnSpec {
    pub window_sizes: Vec<usize>,
    pub filters_per_window: usize,
    pub hidden_units: usize,
    pub dropout_p: f64,
    pub use_readability: bool,
}

impl Default for CnnSpec {
    fn default() -> Self {
        let d = ModelConfig::default();
        Self {
            window_sizes: d.window_sizes,
            filters_per_window: d.filters_per_window,
            hidden_units: d.hidden_units,
            dropout_p: d.dropout_p,
            use_readability: d.use_readability,
        }
    }
}

impl CnnSpec {
    pub fn model_config(&self, input_dim: usize, n_chunks: usize) -> ModelConfig {
        ModelConfig {
            window_sizes: self.window_sizes.clone(),
            filters_per_window: self.filters_per_window,
            hidden_units: self.hidden_units,
            dropout_p: self.dropout_p,
            input_dim,
            n_chunks,
            use_readability: self.use_readability,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Cnn(CnnSpec),
    Book2Vec { hidden_units: usize },
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Cnn(CnnSpec::default())
    }
}

impl ModelSpec {
    pub fn book2vec() -> Self {
        ModelSpec::Book2Vec {
            hidden_units: DEFAULT_BOOK2VEC_HIDDEN,
        }
    }

    pub fn uses_readability(&self) -> bool {
        matches!(self, ModelSpec::Cnn(c) if c.use_readability)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub val_fraction: f64,
    pub features: FeatureConfig,
    pub model: ModelSpec,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            seed: 0,
            val_fraction: 0.2,
            features: FeatureConfig::default(),
            model: ModelSpec::default(),
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "epochs and batch_size must be at least 1".into(),
            ));
        }
        if self.features.n_chunks == 0 {
            return Err(Error::Config("n_chunks must be positive".into()));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::Config(format!(
                "val_fraction {} outside (0, 1)",
                self.val_fraction
            )));
        }
        Ok(())
    }
}
