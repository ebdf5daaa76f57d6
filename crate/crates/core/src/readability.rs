//! The five readability indices and the z-score scaler applied before they
//! are fused into the classifier.
//!
//! Component order is fixed everywhere: FRES, FKG, SMOG, CLI, ARI.

use crate::error::{Error, Result};
use crate::textstats::TextCounts;

pub const N_INDICES: usize = 5;

pub const INDEX_NAMES: [&str; N_INDICES] = ["fres", "fkg", "smog", "cli", "ari"];

/// Standard deviations below this are treated as degenerate.
const MIN_STD: f64 = 1e-12;

/// Options that change how indices are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReadabilityOptions {
    /// Use `- 11.8 * L/W` in the Flesch-Kincaid grade instead of the standard
    /// `+ 11.8 * L/W`. Only useful to compare against that printed variant.
    pub fkg_paper_sign: bool,
}

fn require_words(c: &TextCounts, index: &str) -> Result<()> {
    if c.words == 0 {
        return Err(Error::Domain(format!("{index} needs at least one word")));
    }
    Ok(())
}

fn require_sentences(c: &TextCounts, index: &str) -> Result<()> {
    if c.sentences == 0 {
        return Err(Error::Domain(format!(
            "{index} needs at least one sentence"
        )));
    }
    Ok(())
}

/// Flesch reading ease. Higher is easier.
pub fn fres(c: &TextCounts) -> Result<f64> {
    require_words(c, "FRES")?;
    require_sentences(c, "FRES")?;
    let (w, s, l) = (c.words as f64, c.sentences as f64, c.syllables as f64);
    Ok(206.835 - 1.015 * (w / s) - 84.6 * (l / w))
}

/// Flesch-Kincaid grade level. Higher is harder.
pub fn fkg(c: &TextCounts) -> Result<f64> {
    fkg_with(c, ReadabilityOptions::default())
}

pub fn fkg_with(c: &TextCounts, opts: ReadabilityOptions) -> Result<f64> {
    require_words(c, "FKG")?;
    require_sentences(c, "FKG")?;
    let (w, s, l) = (c.words as f64, c.sentences as f64, c.syllables as f64);
    let syllable_coef = if opts.fkg_paper_sign { -11.8 } else { 11.8 };
    Ok(0.39 * (w / s) + syllable_coef * (l / w) - 15.59)
}

pub fn smog(c: &TextCounts) -> Result<f64> {
    require_sentences(c, "SMOG")?;
    let (p, s) = (c.polysyllables as f64, c.sentences as f64);
    Ok(1.0430 * (p * 30.0 / s).sqrt() + 3.1291)
}

/// Coleman-Liau index, from letters and sentences per 100 words.
pub fn cli_index(c: &TextCounts) -> Result<f64> {
    require_words(c, "CLI")?;
    let w = c.words as f64;
    let letters_per_100 = 100.0 * c.characters as f64 / w;
    let sentences_per_100 = 100.0 * c.sentences as f64 / w;
    Ok(0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8)
}

/// Automated readability index.
pub fn ari(c: &TextCounts) -> Result<f64> {
    require_words(c, "ARI")?;
    require_sentences(c, "ARI")?;
    let (w, s, ch) = (c.words as f64, c.sentences as f64, c.characters as f64);
    Ok(4.71 * (ch / w) + 0.5 * (w / s) - 21.43)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReadabilityVector {
    pub fres: f64,
    pub fkg: f64,
    pub smog: f64,
    pub cli_idx: f64,
    pub ari: f64,
}

impl ReadabilityVector {
    pub fn to_array(&self) -> [f64; N_INDICES] {
        [self.fres, self.fkg, self.smog, self.cli_idx, self.ari]
    }

    pub fn from_array(a: [f64; N_INDICES]) -> Self {
        Self {
            fres: a[0],
            fkg: a[1],
            smog: a[2],
            cli_idx: a[3],
            ari: a[4],
        }
    }
}

pub fn readability_vector(c: &TextCounts) -> Result<ReadabilityVector> {
    readability_vector_with(c, ReadabilityOptions::default())
}

pub fn readability_vector_with(
    c: &TextCounts,
    opts: ReadabilityOptions,
) -> Result<ReadabilityVector> {
    Ok(ReadabilityVector {
        fres: fres(c)?,
        fkg: fkg_with(c, opts)?,
        smog: smog(c)?,
        cli_idx: cli_index(c)?,
        ari: ari(c)?,
    })
}

/// Per-component z-scoring fit on training vectors (population std).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadabilityScaler {
    pub mean: [f64; N_INDICES],
    pub std: [f64; N_INDICES],
}

impl ReadabilityScaler {
    pub fn identity() -> Self {
        Self {
            mean: [0.0; N_INDICES],
            std: [1.0; N_INDICES],
        }
    }

    pub fn apply(&self, v: &ReadabilityVector) -> [f64; N_INDICES] {
        let a = v.to_array();
        std::array::from_fn(|k| (a[k] - self.mean[k]) / self.std[k])
    }
}

pub fn fit_scaler(train: &[ReadabilityVector]) -> Result<ReadabilityScaler> {
    if train.len() < 2 {
        return Err(Error::Domain(format!(
            "scaler needs at least 2 vectors, got {}",
            train.len()
        )));
    }
    let n = train.len() as f64;
    let mut mean = [0.0; N_INDICES];
    for v in train {
        for (m, x) in mean.iter_mut().zip(v.to_array()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; N_INDICES];
    for v in train {
        for (k, x) in v.to_array().into_iter().enumerate() {
            var[k] += (x - mean[k]).powi(2);
        }
    }
    let std = var.map(|s| {
        let sd = (s / n).sqrt();
        if sd < MIN_STD {
            1.0
        } else {
            sd
        }
    });
    Ok(ReadabilityScaler { mean, std })
}

pub fn apply_scaler(scaler: &ReadabilityScaler, v: &ReadabilityVector) -> ReadabilityVector {
    ReadabilityVector::from_array(scaler.apply(v))
}
