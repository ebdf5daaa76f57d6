use std::fmt;
use std::path::{Path, PathBuf};

use booksuccess::corpus::{load_corpus, section_range};
use booksuccess::embedding::{encode_hashed_bow, write_embeddings};
use booksuccess::neuralnet::{read_checkpoint, write_checkpoint};
use booksuccess::pipeline::{
    attribute_readability, book_vectors, evaluate, evaluate_predictions, majority_baseline,
    mcnemar as mcnemar_test, predictions_csv, read_predictions, train_with_progress,
    write_book_vectors, AttributionTarget, EncoderConfig, FeatureConfig, PredictionRecord,
    TrainConfig,
};
use booksuccess::readability::{readability_vector_with, ReadabilityOptions};
use booksuccess::textstats::{counts_for_sentences, segment_sentences};
use booksuccess::{BookRecord, SectionSpec, TextCounts};
use rayon::prelude::*;

use crate::config::{apply, parse_pair, read_config};
use crate::Common;

#[derive(Debug)]
pub enum CliError {
    /// Bad input, configuration or files: exit code 1.
    Input(String),
    /// A numeric or internal failure: exit code 2.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<booksuccess::Error> for CliError {
    fn from(e: booksuccess::Error) -> Self {
        if e.is_internal() {
            CliError::Internal(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(path: &Path) -> CliResult {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Defaults, then the config file, then `--set`, then dedicated flags.
fn resolve_config(common: &Common) -> CliResult<TrainConfig> {
    let mut settings = match &common.config {
        Some(path) => read_config(path).map_err(CliError::Input)?,
        None => Vec::new(),
    };
    for (i, pair) in common.set.iter().enumerate() {
        settings.push(parse_pair(pair, format!("--set #{}", i + 1)).map_err(CliError::Input)?);
    }
    for (key, value) in [
        ("seed", common.seed.map(|s| s.to_string())),
        ("section", common.section.clone()),
    ] {
        if let Some(value) = value {
            settings.push(
                parse_pair(&format!("{key}={value}"), format!("--{key}"))
                    .map_err(CliError::Input)?,
            );
        }
    }
    let mut cfg = TrainConfig::default();
    apply(&mut cfg, &settings).map_err(CliError::Input)?;
    cfg.validate()?;
    Ok(cfg)
}

fn csv_text(rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row)
            .map_err(|e| CliError::Internal(format!("CSV encoding failed: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(format!("CSV encoding failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

const READABILITY_HEADER: [&str; 11] = [
    "book_id", "W", "C", "S", "L", "P", "fres", "fkg", "smog", "cli", "ari",
];

fn readability_row(id: &str, counts: &TextCounts, opts: ReadabilityOptions) -> Vec<String> {
    let mut row = vec![
        id.to_string(),
        counts.words.to_string(),
        counts.characters.to_string(),
        counts.sentences.to_string(),
        counts.syllables.to_string(),
        counts.polysyllables.to_string(),
    ];
    match readability_vector_with(counts, opts) {
        Ok(v) => row.extend(v.to_array().iter().map(|x| x.to_string())),
        Err(_) => row.extend(std::iter::repeat_n("NA".to_string(), 5)),
    }
    row
}

pub fn readability(files: &[PathBuf], out: Option<&Path>, fkg_paper_sign: bool) -> CliResult {
    if files.is_empty() {
        return Err(CliError::Input("no input files".into()));
    }
    let opts = ReadabilityOptions { fkg_paper_sign };
    let mut rows = vec![READABILITY_HEADER.iter().map(|s| s.to_string()).collect()];
    for path in files {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let counts = counts_for_sentences(&segment_sentences(&text));
        rows.push(readability_row(&id, &counts, opts));
    }
    emit(out, &csv_text(rows)?)
}

struct Featurized {
    total_sentences: usize,
    section_sentences: usize,
    counts: TextCounts,
}

fn featurize_one(
    record: &BookRecord,
    dim: usize,
    seed: u64,
    section: SectionSpec,
    opts: ReadabilityOptions,
    out: &Path,
) -> booksuccess::Result<Featurized> {
    if record.book_id.contains(['/', '\\']) || record.book_id.starts_with('.') {
        return Err(booksuccess::Error::Config(format!(
            "book id {:?} is not usable as a file name",
            record.book_id
        )));
    }
    let text = record.read_text()?;
    let sentences = segment_sentences(&text);
    let texts: Vec<&str> = sentences.iter().map(|s| s.text.as_str()).collect();
    let matrix = encode_hashed_bow(&texts, dim, seed)?;
    let range = section_range(sentences.len(), section);
    let counts = counts_for_sentences(&sentences[range.clone()]);
    readability_vector_with(&counts, opts)?;
    write_embeddings(&matrix, out.join(format!("{}.semb", record.book_id)))?;
    Ok(Featurized {
        total_sentences: sentences.len(),
        section_sentences: range.len(),
        counts,
    })
}

pub fn featurize(manifest: &Path, out: &Path, common: &Common) -> CliResult {
    let cfg = resolve_config(common)?;
    let FeatureConfig {
        section,
        encoder,
        readability: opts,
        ..
    } = cfg.features;
    let EncoderConfig::HashedBow { dim, seed } = encoder else {
        return Err(CliError::Input(
            "featurize writes hashed embeddings; encoder=semb is for reading them".into(),
        ));
    };
    let corpus = load_corpus(manifest)?;
    create_dir(out)?;
    let results: Vec<booksuccess::Result<Featurized>> = corpus
        .records
        .par_iter()
        .map(|r| featurize_one(r, dim, seed, section, opts, out))
        .collect();

    let mut readability_rows = vec![READABILITY_HEADER.iter().map(|s| s.to_string()).collect()];
    let mut manifest_rows = vec![[
        "book_id",
        "genre",
        "label",
        "n_sentences",
        "section_sentences",
        "semb",
        "status",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect::<Vec<_>>()];
    let mut failures = 0;
    for (record, result) in corpus.iter().zip(&results) {
        match result {
            Ok(f) => {
                readability_rows.push(readability_row(&record.book_id, &f.counts, opts));
                manifest_rows.push(vec![
                    record.book_id.clone(),
                    record.genre.to_string(),
                    record.label.to_string(),
                    f.total_sentences.to_string(),
                    f.section_sentences.to_string(),
                    format!("{}.semb", record.book_id),
                    "ok".into(),
                ]);
            }
            Err(e) => {
                failures += 1;
                eprintln!("error: book {:?}: {e}", record.book_id);
                manifest_rows.push(vec![
                    record.book_id.clone(),
                    record.genre.to_string(),
                    record.label.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("error: {e}"),
                ]);
            }
        }
    }
    write_file(&out.join("readability.csv"), csv_text(readability_rows)?)?;
    write_file(&out.join("features.csv"), csv_text(manifest_rows)?)?;
    println!(
        "featurized {} of {} books into {}",
        corpus.len() - failures,
        corpus.len(),
        out.display()
    );
    if failures > 0 {
        return Err(CliError::Input(format!("{failures} books failed")));
    }
    Ok(())
}

pub fn train(manifest: &Path, out: &Path, common: &Common) -> CliResult {
    let cfg = resolve_config(common)?;
    let corpus = load_corpus(manifest)?;
    create_dir(out)?;
    eprintln!(
        "training {} on {} books for {} epochs",
        match cfg.model {
            booksuccess::pipeline::ModelSpec::Cnn(_) => "cnn",
            booksuccess::pipeline::ModelSpec::Book2Vec { .. } => "book2vec",
        },
        corpus.len(),
        cfg.epochs
    );
    let outcome = train_with_progress(&corpus, &cfg, |r| {
        eprintln!(
            "epoch {:>3}  loss {:.5}  val weighted F1 {:.4}",
            r.epoch, r.train_loss, r.val_weighted_f1
        );
    })?;
    write_checkpoint(&outcome.checkpoint, out.join("model.bpmd"))?;
    write_file(&out.join("history.csv"), outcome.history_csv())?;
    let split = std::iter::once(vec!["book_id".to_string(), "side".to_string()])
        .chain(
            outcome
                .train_ids
                .iter()
                .map(|id| vec![id.clone(), "train".into()]),
        )
        .chain(
            outcome
                .val_ids
                .iter()
                .map(|id| vec![id.clone(), "validation".into()]),
        );
    write_file(&out.join("split.csv"), csv_text(split)?)?;
    let best = &outcome.history[outcome.best_epoch - 1];
    println!(
        "best epoch {} (val weighted F1 {:.4}); wrote {}",
        best.epoch,
        best.val_weighted_f1,
        out.join("model.bpmd").display()
    );
    Ok(())
}

pub fn eval(
    checkpoint: &Path,
    manifest: &Path,
    out: Option<&Path>,
    baseline_from: Option<&Path>,
) -> CliResult {
    let ck = read_checkpoint(checkpoint)?;
    let test = load_corpus(manifest)?;
    let (report, records) = evaluate(&ck, &test)?;
    print!("{report}");
    if let Some(dir) = out {
        create_dir(dir)?;
        write_file(&dir.join("report.csv"), report.to_csv())?;
        write_file(&dir.join("predictions.csv"), predictions_csv(&records))?;
        write_file(&dir.join("summary.txt"), report.to_string())?;
    }
    if let Some(train_manifest) = baseline_from {
        let train = load_corpus(train_manifest)?;
        let baseline = majority_baseline(&train.labels())?;
        let base_records: Vec<PredictionRecord> = records
            .iter()
            .map(|r| PredictionRecord {
                predicted: baseline.label,
                p_successful: if baseline.label == booksuccess::SuccessLabel::Successful {
                    1.0
                } else {
                    0.0
                },
                ..r.clone()
            })
            .collect();
        let base_report = evaluate_predictions(&base_records)?;
        println!(
            "majority baseline ({}): weighted F1 {:.4}",
            baseline.label, base_report.weighted_f1
        );
        if let Some(dir) = out {
            write_file(&dir.join("baseline_report.csv"), base_report.to_csv())?;
            write_file(
                &dir.join("baseline_predictions.csv"),
                predictions_csv(&base_records),
            )?;
        }
    }
    Ok(())
}

pub fn mcnemar(a: &Path, b: &Path, out: Option<&Path>) -> CliResult {
    let pa = read_predictions(a)?;
    let pb = read_predictions(b)?;
    if pa.len() != pb.len() {
        return Err(CliError::Input(format!(
            "{} has {} predictions but {} has {}",
            a.display(),
            pa.len(),
            b.display(),
            pb.len()
        )));
    }
    for (x, y) in pa.iter().zip(&pb) {
        if x.book_id != y.book_id || x.gold != y.gold {
            return Err(CliError::Input(format!(
                "prediction files disagree on book {:?} / {:?}; both must list the same books with the same gold labels in the same order",
                x.book_id, y.book_id
            )));
        }
    }
    let labels = |p: &[PredictionRecord]| p.iter().map(|r| r.predicted).collect::<Vec<_>>();
    let golds: Vec<_> = pa.iter().map(|r| r.gold).collect();
    let r = mcnemar_test(&labels(&pa), &labels(&pb), &golds)?;
    emit(out, &r.to_csv())?;
    if out.is_some() {
        println!(
            "b={} c={} statistic={} p={}",
            r.b, r.c, r.statistic, r.p_value
        );
    }
    Ok(())
}

pub fn attribute(
    checkpoint: &Path,
    manifest: &Path,
    target: &str,
    out: Option<&Path>,
) -> CliResult {
    let target: AttributionTarget = target.parse()?;
    let ck = read_checkpoint(checkpoint)?;
    let test = load_corpus(manifest)?;
    let report = attribute_readability(&ck, &test, target)?;
    print!("{report}");
    if let Some(dir) = out {
        create_dir(dir)?;
        write_file(&dir.join("attribution.csv"), report.to_csv())?;
        write_file(&dir.join("attribution_per_book.csv"), report.per_book_csv())?;
    }
    Ok(())
}

pub fn export_vectors(manifest: &Path, out: &Path, common: &Common) -> CliResult {
    let cfg = resolve_config(common)?;
    let corpus = load_corpus(manifest)?;
    let rows = book_vectors(&corpus, &cfg.features)?;
    write_book_vectors(&rows, out)?;
    println!("wrote {} book vectors to {}", rows.len(), out.display());
    Ok(())
}
