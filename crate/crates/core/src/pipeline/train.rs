use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::features::{featurize_all, prepare_samples, Sample};
use super::metrics::weighted_f1;
use super::{ModelSpec, TrainConfig};
use crate::corpus::{split_train_val, CorpusSet, SuccessLabel};
use crate::error::{Error, Result};
use crate::neuralnet::{
    adam_step, loss_and_grad, AdamConfig, AdamState, Checkpoint, Model, Prediction,
};
use crate::readability::{fit_scaler, ReadabilityScaler, ReadabilityVector};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_weighted_f1: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub history: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub train_ids: Vec<String>,
    pub val_ids: Vec<String>,
}

impl TrainOutcome {
    pub fn history_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_weighted_f1\n");
        for r in &self.history {
            s.push_str(&format!(
                "{},{},{}\n",
                r.epoch, r.train_loss, r.val_weighted_f1
            ));
        }
        s
    }
}

/// Mini-batch training state for one model.
///
/// Per-sample gradients of a batch are computed in parallel and summed in
/// batch order, so results do not depend on the number of threads.
pub struct Trainer {
    model: Model,
    adam: AdamState,
    rng: Rng,
    batch_size: usize,
    epochs_run: usize,
}

impl Trainer {
    pub fn new(model: Model, adam: AdamConfig, batch_size: usize, seed: u64) -> Self {
        Self {
            adam: AdamState::new(&model, adam),
            model,
            rng: rng::derive(seed, rng::streams::TRAIN),
            batch_size: batch_size.max(1),
            epochs_run: 0,
        }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn into_model(self) -> Model {
        self.model
    }

    /// One pass over `samples` in shuffled mini-batches. Returns the mean
    /// training loss.
    pub fn run_epoch(&mut self, samples: &[Sample]) -> Result<f64> {
        self.epochs_run += 1;
        if samples.is_empty() {
            return Err(Error::Split("no training samples".into()));
        }
        let mut order: Vec<usize> = (0..samples.len()).collect();
        order.shuffle(&mut self.rng);
        let mut total_loss = 0.0;
        for batch in order.chunks(self.batch_size) {
            let masks: Vec<Option<Vec<f64>>> = batch
                .iter()
                .map(|_| self.model.dropout_mask(&mut self.rng))
                .collect();
            let model = &self.model;
            let results: Vec<Result<(f64, Model)>> = batch
                .par_iter()
                .zip(masks.par_iter())
                .map(|(&i, mask)| {
                    let s = &samples[i];
                    let cache = model.forward_with_mask(s.input(model), mask.as_deref())?;
                    let (loss, dlogits) = loss_and_grad(cache.logits(), s.label());
                    Ok((loss, model.backward(&cache, dlogits).params))
                })
                .collect();
            let mut grad = self.model.zeros_like();
            for r in results {
                let (loss, g) = r?;
                if !loss.is_finite() {
                    return Err(Error::Divergence {
                        epoch: self.epochs_run,
                    });
                }
                total_loss += loss;
                grad.add_scaled(1.0, &g);
            }
            let scale = 1.0 / batch.len() as f64;
            for t in grad.tensors_mut() {
                t.iter_mut().for_each(|x| *x *= scale);
            }
            adam_step(&mut self.model, &grad, &mut self.adam)?;
        }
        if !self.model.is_finite() {
            return Err(Error::Divergence {
                epoch: self.epochs_run,
            });
        }
        Ok(total_loss / samples.len() as f64)
    }

    pub fn predict(&self, samples: &[Sample]) -> Result<Vec<Prediction>> {
        predict_samples(&self.model, samples)
    }
}

pub(crate) fn predict_samples(model: &Model, samples: &[Sample]) -> Result<Vec<Prediction>> {
    samples
        .par_iter()
        .map(|s| model.predict(s.input(model)))
        .collect()
}

pub(crate) fn labels(samples: &[Sample]) -> Vec<SuccessLabel> {
    samples.iter().map(Sample::label).collect()
}

/// Splits off a validation set, featurizes, trains for `cfg.epochs`, and
/// keeps the parameters with the best validation weighted F1 (earliest
/// epoch on ties).
pub fn train(corpus: &CorpusSet, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with_progress(corpus, cfg, |_| {})
}

/// [`train`] that reports each finished epoch to `progress`.
pub fn train_with_progress(
    corpus: &CorpusSet,
    cfg: &TrainConfig,
    mut progress: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::Split("empty corpus".into()));
    }
    let (train_set, val_set) = split_train_val(corpus, cfg.val_fraction, cfg.seed)?;
    let train_feats = featurize_all(&train_set, &cfg.features)?;
    let val_feats = featurize_all(&val_set, &cfg.features)?;

    let scaler = if cfg.model.uses_readability() {
        let vs: Vec<ReadabilityVector> = train_feats.iter().map(|f| f.readability).collect();
        Some(fit_scaler(&vs)?)
    } else {
        None
    };
    let applied = scaler.unwrap_or_else(ReadabilityScaler::identity);

    let input_dim = train_feats[0].chunks.dim;
    if let Some(f) = train_feats
        .iter()
        .chain(&val_feats)
        .find(|f| f.chunks.dim != input_dim)
    {
        return Err(Error::Featurize {
            book_id: f.book_id.clone(),
            source: Box::new(Error::EmbeddingDim {
                expected: input_dim,
                found: f.chunks.dim,
            }),
        });
    }
    let model = match &cfg.model {
        ModelSpec::Cnn(spec) => Model::init_cnn(
            spec.model_config(input_dim, cfg.features.n_chunks),
            cfg.seed,
        )?,
        ModelSpec::Book2Vec { hidden_units } => {
            Model::build_book2vec(input_dim, *hidden_units, cfg.seed)?
        }
    };

    let train_ids = train_feats.iter().map(|f| f.book_id.clone()).collect();
    let val_ids = val_feats.iter().map(|f| f.book_id.clone()).collect();
    let train_samples = prepare_samples(train_feats, &applied);
    let val_samples = prepare_samples(val_feats, &applied);
    let val_gold = labels(&val_samples);

    let mut trainer = Trainer::new(model, cfg.adam, cfg.batch_size, cfg.seed);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, Model)> = None;
    for epoch in 1..=cfg.epochs {
        let train_loss = trainer.run_epoch(&train_samples)?;
        let preds: Vec<SuccessLabel> = trainer
            .predict(&val_samples)?
            .into_iter()
            .map(|p| p.label)
            .collect();
        let f1 = weighted_f1(&preds, &val_gold)?;
        let record = EpochRecord {
            epoch,
            train_loss,
            val_weighted_f1: f1,
        };
        progress(&record);
        history.push(record);
        if best.as_ref().is_none_or(|(b, _, _)| f1 > *b) {
            best = Some((f1, epoch, trainer.model().clone()));
        }
    }
    let (_, best_epoch, mut model) = best.expect("at least one epoch");
    model.round_to_f32();
    Ok(TrainOutcome {
        checkpoint: Checkpoint {
            model,
            scaler,
            metadata: cfg.features.to_metadata(),
        },
        history,
        best_epoch,
        train_ids,
        val_ids,
    })
}
