use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::features::{check_compatible, featurize_all, prepare_samples, Sample};
use super::FeatureConfig;
use crate::corpus::CorpusSet;
use crate::error::{Error, Result};
use crate::neuralnet::{softmax, Checkpoint, Logits, Model};
use crate::readability::{INDEX_NAMES, N_INDICES};

/// The scalar whose gradient is attributed to the readability inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AttributionTarget {
    /// The `Successful` logit.
    #[default]
    Logit,
    /// The softmax probability of `Successful`.
    Probability,
}

impl AttributionTarget {
    fn dlogits(self, logits: Logits) -> Logits {
        match self {
            AttributionTarget::Logit => [1.0, 0.0],
            AttributionTarget::Probability => {
                let p = softmax(logits);
                let g = p[0] * p[1];
                [g, -g]
            }
        }
    }

    /// Evaluates the target scalar from logits.
    pub fn value(self, logits: Logits) -> f64 {
        match self {
            AttributionTarget::Logit => logits[0],
            AttributionTarget::Probability => softmax(logits)[0],
        }
    }
}

impl fmt::Display for AttributionTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttributionTarget::Logit => "logit",
            AttributionTarget::Probability => "probability",
        })
    }
}

impl FromStr for AttributionTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logit" => Ok(AttributionTarget::Logit),
            "probability" | "prob" => Ok(AttributionTarget::Probability),
            other => Err(Error::Config(format!(
                "attribution target must be logit or probability, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributionReport {
    /// Ordered FRES, FKG, SMOG, CLI, ARI.
    pub mean_gradient: [f64; N_INDICES],
    pub n_books: usize,
    pub target: AttributionTarget,
    pub per_book: Vec<(String, [f64; N_INDICES])>,
}

impl AttributionReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,mean_gradient\n");
        for (name, g) in INDEX_NAMES.iter().zip(self.mean_gradient) {
            s.push_str(&format!("{name},{g}\n"));
        }
        s
    }

    pub fn per_book_csv(&self) -> String {
        let mut s = format!("book_id,{}\n", INDEX_NAMES.join(","));
        for (id, g) in &self.per_book {
            s.push_str(id);
            for x in g {
                s.push_str(&format!(",{x}"));
            }
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for AttributionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "mean gradient of the Successful {} over {} books:",
            self.target, self.n_books
        )?;
        for (name, g) in INDEX_NAMES.iter().zip(self.mean_gradient) {
            writeln!(f, "  {name:<5} {g:+.6e}")?;
        }
        Ok(())
    }
}

/// Gradient of `target` with respect to one book's five scaled readability
/// inputs, in inference mode.
pub fn readability_gradient(
    model: &Model,
    sample: &Sample,
    target: AttributionTarget,
) -> Result<[f64; N_INDICES]> {
    if !model.uses_readability() {
        return Err(Error::NoReadability);
    }
    let cache = model.forward_with_mask(sample.input(model), None)?;
    let grads = model.backward(&cache, target.dlogits(cache.logits()));
    grads.readability.ok_or(Error::NoReadability)
}

/// Per-book readability gradients on `samples` and their mean.
pub fn attribute_samples(
    model: &Model,
    samples: &[Sample],
    target: AttributionTarget,
) -> Result<AttributionReport> {
    if !model.uses_readability() {
        return Err(Error::NoReadability);
    }
    if samples.is_empty() {
        return Err(Error::Domain("attribution over an empty set".into()));
    }
    let grads: Vec<[f64; N_INDICES]> = samples
        .par_iter()
        .map(|s| readability_gradient(model, s, target))
        .collect::<Result<_>>()?;
    let mut mean = [0.0; N_INDICES];
    for g in &grads {
        for (m, x) in mean.iter_mut().zip(g) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= grads.len() as f64);
    Ok(AttributionReport {
        mean_gradient: mean,
        n_books: grads.len(),
        target,
        per_book: samples
            .iter()
            .map(|s| s.features.book_id.clone())
            .zip(grads)
            .collect(),
    })
}

/// Featurizes `test` as recorded in the checkpoint and attributes the
/// model's output to the readability inputs.
pub fn attribute_readability(
    checkpoint: &Checkpoint,
    test: &CorpusSet,
    target: AttributionTarget,
) -> Result<AttributionReport> {
    if !checkpoint.model.uses_readability() {
        return Err(Error::NoReadability);
    }
    let scaler = checkpoint
        .scaler
        .ok_or_else(|| Error::Checkpoint("readability model without a scaler".into()))?;
    let cfg = FeatureConfig::from_metadata(&checkpoint.metadata)?;
    let samples = prepare_samples(featurize_all(test, &cfg)?, &scaler);
    check_compatible(&checkpoint.model, &samples)?;
    attribute_samples(&checkpoint.model, &samples, target)
}
