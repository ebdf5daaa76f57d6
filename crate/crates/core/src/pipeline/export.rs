use std::path::Path;

use rayon::prelude::*;

use super::features::embed_section;
use super::FeatureConfig;
use crate::corpus::{CorpusSet, Genre};
use crate::embedding::book_average;
use crate::error::{Error, Result};

/// Averaged section embedding of every book, in corpus order.
pub fn book_vectors(
    corpus: &CorpusSet,
    cfg: &FeatureConfig,
) -> Result<Vec<(String, Genre, Vec<f64>)>> {
    corpus
        .records
        .par_iter()
        .map(|r| {
            let wrap = |e: Error| Error::Featurize {
                book_id: r.book_id.clone(),
                source: Box::new(e),
            };
            let (_, matrix) = embed_section(r, cfg).map_err(wrap)?;
            let v = book_average(&matrix).map_err(wrap)?;
            Ok((r.book_id.clone(), r.genre, v))
        })
        .collect()
}

/// CSV with header `book_id,genre,v0,..`. Values are printed as the shortest
/// decimal that round-trips through f32.
pub fn book_vectors_csv(rows: &[(String, Genre, Vec<f64>)]) -> String {
    let dim = rows.first().map_or(0, |r| r.2.len());
    let mut s = String::from("book_id,genre");
    for i in 0..dim {
        s.push_str(&format!(",v{i}"));
    }
    s.push('\n');
    for (id, genre, v) in rows {
        s.push_str(&format!("{id},{genre}"));
        for x in v {
            s.push_str(&format!(",{}", *x as f32));
        }
        s.push('\n');
    }
    s
}

pub fn write_book_vectors(
    rows: &[(String, Genre, Vec<f64>)],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, book_vectors_csv(rows)).map_err(|e| Error::io(path, e))
}

pub fn export_book_vectors(
    corpus: &CorpusSet,
    cfg: &FeatureConfig,
    out_path: impl AsRef<Path>,
) -> Result<usize> {
    let rows = book_vectors(corpus, cfg)?;
    write_book_vectors(&rows, out_path)?;
    Ok(rows.len())
}
