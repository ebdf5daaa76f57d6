use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use super::features::{check_compatible, featurize_all, prepare_samples};
use super::train::predict_samples;
use super::FeatureConfig;
use crate::corpus::{CorpusSet, Genre, SuccessLabel};
use crate::error::{Error, Result};
use crate::neuralnet::Checkpoint;
use crate::readability::ReadabilityScaler;

/// 2x2 counts indexed `[gold][predicted]` by class index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub counts: [[usize; 2]; 2],
}

impl Confusion {
    pub fn from_labels(preds: &[SuccessLabel], golds: &[SuccessLabel]) -> Result<Self> {
        if preds.len() != golds.len() {
            return Err(Error::LengthMismatch {
                left: preds.len(),
                right: golds.len(),
            });
        }
        let mut counts = [[0usize; 2]; 2];
        for (p, g) in preds.iter().zip(golds) {
            counts[g.class_index()][p.class_index()] += 1;
        }
        Ok(Self { counts })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, class: usize) -> usize {
        self.counts[class].iter().sum()
    }

    /// F1 of one class; zero when precision and recall are both zero or
    /// undefined.
    pub fn f1(&self, class: usize) -> f64 {
        let other = 1 - class;
        let tp = self.counts[class][class] as f64;
        let fp = self.counts[other][class] as f64;
        let fn_ = self.counts[class][other] as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        }
    }

    /// Per-class F1 weighted by class support.
    pub fn weighted_f1(&self) -> f64 {
        let n = self.total() as f64;
        (0..2)
            .map(|k| self.support(k) as f64 / n * self.f1(k))
            .sum()
    }
}

pub fn weighted_f1(preds: &[SuccessLabel], golds: &[SuccessLabel]) -> Result<f64> {
    if golds.is_empty() {
        return Err(Error::Domain("weighted F1 of an empty set".into()));
    }
    Ok(Confusion::from_labels(preds, golds)?.weighted_f1())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub weighted_f1: f64,
    /// Indexed by class: `[Successful, Unsuccessful]`.
    pub per_class_f1: [f64; 2],
    /// Only genres present in the evaluated set.
    pub per_genre_f1: BTreeMap<Genre, f64>,
    pub confusion: Confusion,
    pub n: usize,
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let c = &self.confusion.counts;
        let mut s = String::from("metric,value\n");
        s.push_str(&format!("weighted_f1,{}\n", self.weighted_f1));
        s.push_str(&format!("f1_successful,{}\n", self.per_class_f1[0]));
        s.push_str(&format!("f1_unsuccessful,{}\n", self.per_class_f1[1]));
        s.push_str(&format!("n,{}\n", self.n));
        s.push_str(&format!("gold_successful_pred_successful,{}\n", c[0][0]));
        s.push_str(&format!("gold_successful_pred_unsuccessful,{}\n", c[0][1]));
        s.push_str(&format!("gold_unsuccessful_pred_successful,{}\n", c[1][0]));
        s.push_str(&format!(
            "gold_unsuccessful_pred_unsuccessful,{}\n",
            c[1][1]
        ));
        for (g, f1) in &self.per_genre_f1 {
            s.push_str(&format!("genre:{g},{f1}\n"));
        }
        s
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.confusion.counts;
        writeln!(f, "books evaluated: {}", self.n)?;
        writeln!(f, "weighted F1:     {:.4}", self.weighted_f1)?;
        writeln!(
            f,
            "class F1:        Successful {:.4}, Unsuccessful {:.4}",
            self.per_class_f1[0], self.per_class_f1[1]
        )?;
        writeln!(f, "confusion (rows gold, cols predicted; S, U):")?;
        writeln!(f, "  S  {:>6} {:>6}", c[0][0], c[0][1])?;
        writeln!(f, "  U  {:>6} {:>6}", c[1][0], c[1][1])?;
        if !self.per_genre_f1.is_empty() {
            writeln!(f, "per-genre weighted F1:")?;
            for (g, v) in &self.per_genre_f1 {
                writeln!(f, "  {:<18} {:.4}", g.name(), v)?;
            }
        }
        Ok(())
    }
}

/// One book's prediction, as written to and read from prediction CSVs.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub book_id: String,
    pub genre: Genre,
    pub gold: SuccessLabel,
    pub predicted: SuccessLabel,
    pub p_successful: f64,
}

pub fn evaluate_predictions(records: &[PredictionRecord]) -> Result<EvalReport> {
    let preds: Vec<SuccessLabel> = records.iter().map(|r| r.predicted).collect();
    let golds: Vec<SuccessLabel> = records.iter().map(|r| r.gold).collect();
    let confusion = Confusion::from_labels(&preds, &golds)?;
    if records.is_empty() {
        return Err(Error::Domain("nothing to evaluate".into()));
    }
    let mut per_genre_f1 = BTreeMap::new();
    for g in Genre::ALL {
        let (p, t): (Vec<SuccessLabel>, Vec<SuccessLabel>) = records
            .iter()
            .filter(|r| r.genre == g)
            .map(|r| (r.predicted, r.gold))
            .unzip();
        if !t.is_empty() {
            per_genre_f1.insert(g, weighted_f1(&p, &t)?);
        }
    }
    Ok(EvalReport {
        weighted_f1: confusion.weighted_f1(),
        per_class_f1: [confusion.f1(0), confusion.f1(1)],
        per_genre_f1,
        confusion,
        n: records.len(),
    })
}

/// Featurizes `test` the way the checkpoint was trained and scores it.
pub fn evaluate(
    checkpoint: &Checkpoint,
    test: &CorpusSet,
) -> Result<(EvalReport, Vec<PredictionRecord>)> {
    let cfg = FeatureConfig::from_metadata(&checkpoint.metadata)?;
    let scaler = checkpoint
        .scaler
        .unwrap_or_else(ReadabilityScaler::identity);
    if checkpoint.model.uses_readability() && checkpoint.scaler.is_none() {
        return Err(Error::Checkpoint(
            "readability model without a scaler".into(),
        ));
    }
    let samples = prepare_samples(featurize_all(test, &cfg)?, &scaler);
    check_compatible(&checkpoint.model, &samples)?;
    let preds = predict_samples(&checkpoint.model, &samples)?;
    let records: Vec<PredictionRecord> = samples
        .iter()
        .zip(preds)
        .map(|(s, p)| PredictionRecord {
            book_id: s.features.book_id.clone(),
            genre: s.features.genre,
            gold: s.features.label,
            predicted: p.label,
            p_successful: p.p_successful,
        })
        .collect();
    Ok((evaluate_predictions(&records)?, records))
}

const PREDICTION_HEADER: [&str; 5] = ["book_id", "genre", "gold", "predicted", "p_successful"];

pub fn predictions_csv(records: &[PredictionRecord]) -> String {
    let mut s = PREDICTION_HEADER.join(",");
    s.push('\n');
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&r.book_id),
            r.genre,
            r.gold,
            r.predicted,
            r.p_successful
        ));
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_predictions(records: &[PredictionRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, predictions_csv(records)).map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>> {
    let path = path.as_ref();
    let malformed = |row: usize, message: String| Error::MalformedRow {
        path: path.to_path_buf(),
        row,
        message,
    };
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    let header = reader
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != PREDICTION_HEADER {
        return Err(malformed(
            1,
            format!("header must be `{}`", PREDICTION_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| malformed(i + 2, e.to_string()))?;
        let line = i + 2;
        let genre = row[1].parse::<Genre>().map_err(|_| Error::UnknownGenre {
            row: line,
            value: row[1].to_string(),
        })?;
        out.push(PredictionRecord {
            book_id: row[0].to_string(),
            genre,
            gold: row[2]
                .parse()
                .map_err(|_| malformed(line, format!("bad gold label {:?}", &row[2])))?,
            predicted: row[3]
                .parse()
                .map_err(|_| malformed(line, format!("bad predicted label {:?}", &row[3])))?,
            p_successful: row[4]
                .parse()
                .map_err(|_| malformed(line, format!("bad probability {:?}", &row[4])))?,
        });
    }
    Ok(out)
}
