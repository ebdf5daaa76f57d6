use rayon::prelude::*;

use super::{EncoderConfig, FeatureConfig};
use crate::corpus::{section_range, BookRecord, CorpusSet, Genre, SuccessLabel};
use crate::embedding::{
    book_average, chunk_average, encode_hashed_bow, load_embeddings, ChunkSequence,
    SentenceEmbeddingMatrix,
};
use crate::error::{Error, Result};
use crate::neuralnet::{Input, Model};
use crate::readability::{
    readability_vector_with, ReadabilityScaler, ReadabilityVector, N_INDICES,
};
use crate::textstats::{counts_for_sentences, segment_sentences, TextCounts};

/// Model-ready features of one book.
#[derive(Debug, Clone, PartialEq)]
pub struct BookFeatures {
    pub book_id: String,
    pub genre: Genre,
    pub label: SuccessLabel,
    /// Sentences in the selected section.
    pub n_sentences: usize,
    pub counts: TextCounts,
    pub readability: ReadabilityVector,
    pub chunks: ChunkSequence,
    pub book_vector: Vec<f64>,
}

/// Segments a book and embeds the selected section.
pub(crate) fn embed_section(
    record: &BookRecord,
    cfg: &FeatureConfig,
) -> Result<(Vec<crate::textstats::Sentence>, SentenceEmbeddingMatrix)> {
    let text = record.read_text()?;
    let sentences = segment_sentences(&text);
    let range = section_range(sentences.len(), cfg.section);
    let matrix = match &cfg.encoder {
        EncoderConfig::HashedBow { dim, seed } => {
            let texts: Vec<&str> = sentences[range.clone()]
                .iter()
                .map(|s| s.text.as_str())
                .collect();
            encode_hashed_bow(&texts, *dim, *seed)?
        }
        EncoderConfig::ExternalSemb { dir } => {
            let full = load_embeddings(dir.join(format!("{}.semb", record.book_id)))?;
            if full.n_sentences() != sentences.len() {
                return Err(Error::EmbeddingRows {
                    rows: full.n_sentences(),
                    sentences: sentences.len(),
                });
            }
            full.rows(range.clone())
        }
    };
    Ok((sentences[range].to_vec(), matrix))
}

pub fn featurize_book(record: &BookRecord, cfg: &FeatureConfig) -> Result<BookFeatures> {
    let wrap = |e: Error| Error::Featurize {
        book_id: record.book_id.clone(),
        source: Box::new(e),
    };
    let (sentences, matrix) = embed_section(record, cfg).map_err(wrap)?;
    let counts = counts_for_sentences(&sentences);
    let readability = readability_vector_with(&counts, cfg.readability).map_err(wrap)?;
    let chunks = chunk_average(&matrix, cfg.n_chunks).map_err(wrap)?;
    let book_vector = book_average(&matrix).map_err(wrap)?;
    Ok(BookFeatures {
        book_id: record.book_id.clone(),
        genre: record.genre,
        label: record.label,
        n_sentences: sentences.len(),
        counts,
        readability,
        chunks,
        book_vector,
    })
}

/// Featurizes every book in parallel; results keep corpus order.
pub fn featurize_corpus(corpus: &CorpusSet, cfg: &FeatureConfig) -> Vec<Result<BookFeatures>> {
    corpus
        .records
        .par_iter()
        .map(|r| featurize_book(r, cfg))
        .collect()
}

/// Featurizes all books, failing on the first (in corpus order) error.
pub(crate) fn featurize_all(corpus: &CorpusSet, cfg: &FeatureConfig) -> Result<Vec<BookFeatures>> {
    featurize_corpus(corpus, cfg).into_iter().collect()
}

/// Features paired with their scaled readability scores.
#[derive(Debug, Clone)]
pub struct Sample {
    pub features: BookFeatures,
    pub scaled_readability: [f64; N_INDICES],
}

impl Sample {
    pub fn label(&self) -> SuccessLabel {
        self.features.label
    }

    /// The input `model` consumes for this book.
    pub fn input<'a>(&'a self, model: &Model) -> Input<'a> {
        match model {
            Model::Cnn(m) => Input::Chunks {
                chunks: &self.features.chunks,
                readability: m.config.use_readability.then_some(&self.scaled_readability),
            },
            Model::Book2Vec(_) => Input::Vector(&self.features.book_vector),
        }
    }
}

pub fn prepare_samples(features: Vec<BookFeatures>, scaler: &ReadabilityScaler) -> Vec<Sample> {
    features
        .into_iter()
        .map(|f| Sample {
            scaled_readability: scaler.apply(&f.readability),
            features: f,
        })
        .collect()
}

/// Rejects samples a checkpointed model cannot consume.
pub(crate) fn check_compatible(model: &Model, samples: &[Sample]) -> Result<()> {
    for s in samples {
        let dim = s.features.chunks.dim;
        if dim != model.input_dim() {
            return Err(Error::Checkpoint(format!(
                "model expects {}-dimensional embeddings but book {:?} has {dim}",
                model.input_dim(),
                s.features.book_id
            )));
        }
        if let Model::Cnn(m) = model {
            if s.features.chunks.n_chunks != m.config.n_chunks {
                return Err(Error::Checkpoint(format!(
                    "model expects {} chunks but featurization produced {}",
                    m.config.n_chunks, s.features.chunks.n_chunks
                )));
            }
        }
    }
    Ok(())
}
