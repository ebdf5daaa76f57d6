//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p booksuccess-core --test acceptance`. Set
//! `ACCEPTANCE_ONLY=1,3,10` to run a subset; criterion 8 needs 5, 6 and 7
//! and runs them itself when they were filtered out. `ACCEPTANCE_SEED`
//! replaces the default seed of 20.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use booksuccess::corpus::SuccessLabel;
use booksuccess::embedding::{
    chunk_average, chunk_sizes, decode_semb, encode_semb, load_embeddings, write_embeddings,
    SentenceEmbeddingMatrix,
};
use booksuccess::neuralnet::{encode_checkpoint, Input, Model};
use booksuccess::pipeline::{
    attribute_readability, evaluate, featurize_corpus, majority_baseline, mcnemar, predictions_csv,
    prepare_samples, readability_gradient, train, weighted_f1, AttributionTarget, CnnSpec,
    EncoderConfig, FeatureConfig, ModelSpec, TrainConfig, Trainer,
};
use booksuccess::readability::{ari, cli_index, fit_scaler, fkg, fres, readability_vector, smog};
use booksuccess::synthetic::{
    planted_corpus, random_label_corpus, readability_corpus, PlantedConfig, ReadabilityCorpusConfig,
};
use booksuccess::{AdamConfig, Error, TextCounts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn seed() -> u64 {
    std::env::var("ACCEPTANCE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(20)
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within_budget(v: Verdict, elapsed: Duration, budget: Duration) -> Verdict {
    if elapsed > budget {
        verdict(false, format!("{}; over the {:?} budget", v.detail, budget))
    } else {
        v
    }
}

// ---------------------------------------------------------------- 1

fn counts(w: usize, c: usize, s: usize, l: usize, p: usize) -> TextCounts {
    TextCounts {
        words: w,
        characters: c,
        sentences: s,
        syllables: l,
        polysyllables: p,
    }
}

fn criterion_1() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut check = |got: f64, want: f64| worst = worst.max((got - want).abs());
    check(fres(&counts(100, 0, 10, 150, 0)).unwrap(), 69.785);
    check(fres(&counts(7, 0, 7, 7, 0)).unwrap(), 121.22);
    check(fres(&counts(100, 0, 10, 200, 0)).unwrap(), 27.485);
    check(fkg(&counts(100, 0, 10, 150, 0)).unwrap(), 6.01);
    check(fkg(&counts(9, 0, 9, 9, 0)).unwrap(), -3.4);
    check(fkg(&counts(100, 0, 5, 170, 0)).unwrap(), 12.27);
    check(
        smog(&counts(1, 0, 30, 1, 30)).unwrap(),
        1.0430 * 30f64.sqrt() + 3.1291,
    );
    check(smog(&counts(1, 0, 17, 1, 0)).unwrap(), 3.1291);
    check(
        smog(&counts(1, 0, 30, 1, 10)).unwrap(),
        1.0430 * 10f64.sqrt() + 3.1291,
    );
    check(cli_index(&counts(100, 450, 5, 0, 0)).unwrap(), 9.18);
    check(cli_index(&counts(13, 13, 13, 0, 0)).unwrap(), -39.52);
    check(cli_index(&counts(100, 500, 4, 0, 0)).unwrap(), 12.416);
    check(ari(&counts(100, 450, 10, 0, 0)).unwrap(), 4.765);
    check(ari(&counts(11, 11, 11, 0, 0)).unwrap(), -16.22);
    check(ari(&counts(100, 600, 5, 0, 0)).unwrap(), 16.83);
    let v = readability_vector(&counts(100, 450, 10, 150, 5))
        .unwrap()
        .to_array();
    for (got, want) in v
        .iter()
        .zip([69.785, 6.01, 3.1291 + 1.0430 * 15f64.sqrt(), 7.70, 4.765])
    {
        check(*got, want);
    }
    let examples_ok = worst < 1e-9;

    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    let mut scale_worst: f64 = 0.0;
    for _ in 0..1000 {
        let w = rng.random_range(1..10_000);
        let c = rng.random_range(w..=12 * w);
        let s = rng.random_range(1..=w);
        let l = rng.random_range(w..=4 * w);
        let p = rng.random_range(0..=w);
        let a = readability_vector(&counts(w, c, s, l, p))
            .unwrap()
            .to_array();
        let b = readability_vector(&counts(2 * w, 2 * c, 2 * s, 2 * l, 2 * p))
            .unwrap()
            .to_array();
        for (x, y) in a.iter().zip(b) {
            scale_worst = scale_worst.max((x - y).abs());
        }
    }
    verdict(
        examples_ok && scale_worst < 1e-9,
        format!(
            "max example error {worst:.1e}, max scaling drift {scale_worst:.1e} over 1000 tuples"
        ),
    )
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Verdict {
    let r = common::cnn_gradient_check(20, seed());
    verdict(
        r.max_rel < 1e-4 && r.checked > 0,
        format!(
            "max rel error {:.2e} over {} coordinates ({} at switch points skipped); worst: {}",
            r.max_rel, r.checked, r.kinks, r.worst
        ),
    )
}

// ---------------------------------------------------------------- 3

/// Weighted F1 by explicit enumeration of the confusion matrix.
fn f1_oracle(preds: &[SuccessLabel], golds: &[SuccessLabel]) -> f64 {
    let mut m = [[0usize; 2]; 2];
    for (p, g) in preds.iter().zip(golds) {
        m[g.class_index()][p.class_index()] += 1;
    }
    let n = golds.len() as f64;
    let mut total = 0.0;
    for k in 0..2 {
        let tp = m[k][k] as f64;
        let fp = m[1 - k][k] as f64;
        let fn_ = m[k][1 - k] as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        total += (m[k][0] + m[k][1]) as f64 / n * f1;
    }
    total
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    let label = |rng: &mut ChaCha8Rng| SuccessLabel::from_class_index(rng.random_range(0..2));
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=64);
        let preds: Vec<_> = (0..n).map(|_| label(&mut rng)).collect();
        let golds: Vec<_> = (0..n).map(|_| label(&mut rng)).collect();
        if weighted_f1(&preds, &golds).unwrap() != f1_oracle(&preds, &golds) {
            mismatches += 1;
        }
    }
    use SuccessLabel::{Successful as S, Unsuccessful as U};
    let mut a = vec![S; 15];
    let mut b = vec![U; 15];
    let mut g = vec![S; 15];
    a.push(U);
    b.push(S);
    g.push(S);
    let r = mcnemar(&a, &b, &g).unwrap();
    let mc_ok = (r.b, r.c) == (15, 1)
        && (r.statistic - 10.5625).abs() < 1e-12
        && (r.p_value - 0.00115).abs() < 1e-5;
    verdict(
        mismatches == 0 && mc_ok,
        format!(
            "{mismatches}/1000 oracle mismatches; McNemar b=15 c=1 -> {} p={:.6}",
            r.statistic, r.p_value
        ),
    )
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    let mut failures = Vec::new();
    for _ in 0..1000 {
        let n = rng.random_range(0..500);
        let k = rng.random_range(1..80);
        let sizes = chunk_sizes(n, k);
        let nonzero: Vec<usize> = sizes.iter().copied().filter(|&s| s > 0).collect();
        let spread = nonzero.iter().max().unwrap_or(&0) - nonzero.iter().min().unwrap_or(&0);
        if sizes.len() != k || sizes.iter().sum::<usize>() != n || spread > 1 {
            failures.push(format!("sizes n={n} k={k}"));
        }
    }
    for _ in 0..50 {
        let dim = rng.random_range(1..6);
        let n = rng.random_range(1..30);
        let m = random_matrix(&mut rng, n, dim);
        let same = chunk_average(&m, n).unwrap();
        let exact = same
            .values
            .iter()
            .zip(m.values())
            .all(|(a, b)| *a == f64::from(*b));
        if !exact {
            failures.push(format!("identity n={n}"));
        }
        let k = n + rng.random_range(1..10);
        let padded = chunk_average(&m, k).unwrap();
        let pad_ok = (0..k).all(|r| {
            let row = padded.row(r);
            if r < n {
                row.iter().zip(m.row(r)).all(|(a, b)| *a == f64::from(*b))
            } else {
                row.iter().all(|x| *x == 0.0)
            }
        });
        if !pad_ok {
            failures.push(format!("padding n={n} k={k}"));
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            "1000 size draws, 50 identity and 50 padding cases".to_string()
        } else {
            format!("failures: {}", failures.join("; "))
        },
    )
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> SentenceEmbeddingMatrix {
    let values = (0..n * dim)
        .map(|_| rng.random_range(-3.0f32..3.0))
        .collect();
    SentenceEmbeddingMatrix::new(n, dim, values).unwrap()
}

// ---------------------------------------------------------------- 5-7

/// Everything a scenario run produces that must be reproducible.
#[derive(PartialEq)]
struct Artifacts(Vec<(String, Vec<u8>)>);

struct PlantedRun {
    cnn_f1: f64,
    majority_f1: f64,
    best_epoch: usize,
    artifacts: Artifacts,
}

fn run_planted(dir: &Path) -> booksuccess::Result<PlantedRun> {
    let corpus = planted_corpus(
        dir,
        &PlantedConfig {
            seed: seed(),
            ..PlantedConfig::default()
        },
    )?;
    let cfg = TrainConfig {
        seed: seed(),
        ..TrainConfig::default()
    };
    let outcome = train(&corpus.train, &cfg)?;
    let (report, records) = evaluate(&outcome.checkpoint, &corpus.test)?;
    let baseline = majority_baseline(&corpus.train.labels())?;
    let majority_f1 = weighted_f1(&baseline.predict(corpus.test.len()), &corpus.test.labels())?;
    Ok(PlantedRun {
        cnn_f1: report.weighted_f1,
        majority_f1,
        best_epoch: outcome.best_epoch,
        artifacts: Artifacts(vec![
            (
                "planted.bpmd".into(),
                encode_checkpoint(&outcome.checkpoint)?,
            ),
            (
                "planted_history.csv".into(),
                outcome.history_csv().into_bytes(),
            ),
            ("planted_report.csv".into(), report.to_csv().into_bytes()),
            (
                "planted_predictions.csv".into(),
                predictions_csv(&records).into_bytes(),
            ),
        ]),
    })
}

struct ReadabilityRun {
    f1_with: f64,
    f1_without: f64,
    mean_gradient: [f64; 5],
    attribution_fd_max_rel: f64,
    attribution_fd_checked: usize,
    artifacts: Artifacts,
}

fn run_readability(dir: &Path) -> booksuccess::Result<ReadabilityRun> {
    let corpus = readability_corpus(
        dir,
        &ReadabilityCorpusConfig {
            seed: seed(),
            ..ReadabilityCorpusConfig::default()
        },
    )?;
    let features = FeatureConfig {
        encoder: EncoderConfig::ExternalSemb {
            dir: corpus.semb_dir.clone().expect("noise embeddings"),
        },
        ..FeatureConfig::default()
    };
    let with_cfg = TrainConfig {
        seed: seed(),
        features: features.clone(),
        ..TrainConfig::default()
    };
    let without_cfg = TrainConfig {
        model: ModelSpec::Cnn(CnnSpec {
            use_readability: false,
            ..CnnSpec::default()
        }),
        ..with_cfg.clone()
    };
    let with = train(&corpus.train, &with_cfg)?;
    let without = train(&corpus.train, &without_cfg)?;
    let (with_report, _) = evaluate(&with.checkpoint, &corpus.test)?;
    let (without_report, _) = evaluate(&without.checkpoint, &corpus.test)?;
    let attribution =
        attribute_readability(&with.checkpoint, &corpus.test, AttributionTarget::Logit)?;

    // Finite differences on the logit, per test book.
    let scaler = with.checkpoint.scaler.expect("scaler");
    let feats = featurize_corpus(&corpus.test, &features)
        .into_iter()
        .collect::<booksuccess::Result<Vec<_>>>()?;
    let samples = prepare_samples(feats, &scaler);
    let model = &with.checkpoint.model;
    let mut fd_max: f64 = 0.0;
    let mut checked = 0;
    for s in &samples {
        let g = readability_gradient(model, s, AttributionTarget::Logit)?;
        for i in 0..5 {
            let at = |delta: f64| -> booksuccess::Result<f64> {
                let mut r = s.scaled_readability;
                r[i] += delta;
                Ok(model.logits(Input::Chunks {
                    chunks: &s.features.chunks,
                    readability: Some(&r),
                })?[0])
            };
            let num = (at(common::FD_EPS)? - at(-common::FD_EPS)?) / (2.0 * common::FD_EPS);
            fd_max = fd_max.max(common::rel_err(g[i], num));
            checked += 1;
        }
    }

    Ok(ReadabilityRun {
        f1_with: with_report.weighted_f1,
        f1_without: without_report.weighted_f1,
        mean_gradient: attribution.mean_gradient,
        attribution_fd_max_rel: fd_max,
        attribution_fd_checked: checked,
        artifacts: Artifacts(vec![
            (
                "readability_with.bpmd".into(),
                encode_checkpoint(&with.checkpoint)?,
            ),
            (
                "readability_without.bpmd".into(),
                encode_checkpoint(&without.checkpoint)?,
            ),
            (
                "readability_with_report.csv".into(),
                with_report.to_csv().into_bytes(),
            ),
            (
                "readability_without_report.csv".into(),
                without_report.to_csv().into_bytes(),
            ),
            ("attribution.csv".into(), attribution.to_csv().into_bytes()),
            (
                "attribution_per_book.csv".into(),
                attribution.per_book_csv().into_bytes(),
            ),
        ]),
    })
}

struct Scenarios {
    planted: booksuccess::Result<PlantedRun>,
    planted_time: Duration,
    readability: booksuccess::Result<ReadabilityRun>,
    readability_time: Duration,
}

/// Runs both scenarios with their corpora generated under `root`. The path is
/// fixed across reruns: checkpoints record the embedding directory, so the
/// determinism check needs byte-identical inputs, location included.
fn run_scenarios(root: &Path) -> Scenarios {
    if root.exists() {
        std::fs::remove_dir_all(root).expect("clear scenario dir");
    }
    let t = Instant::now();
    let planted = run_planted(&root.join("planted"));
    let planted_time = t.elapsed();
    let t = Instant::now();
    let readability = run_readability(&root.join("readability"));
    let readability_time = t.elapsed();
    Scenarios {
        planted,
        planted_time,
        readability,
        readability_time,
    }
}

const SCENARIO_BUDGET: Duration = Duration::from_secs(300);

fn criterion_5(s: &Scenarios) -> Verdict {
    match &s.planted {
        Ok(r) => within_budget(
            verdict(
                r.cnn_f1 >= 0.95 && r.cnn_f1 > r.majority_f1,
                format!(
                    "test weighted F1 {:.4} (best epoch {}), majority baseline {:.4}, {:.1?}",
                    r.cnn_f1, r.best_epoch, r.majority_f1, s.planted_time
                ),
            ),
            s.planted_time,
            SCENARIO_BUDGET,
        ),
        Err(e) => verdict(false, format!("error: {e}")),
    }
}

fn criterion_6(s: &Scenarios) -> Verdict {
    match &s.readability {
        Ok(r) => within_budget(
            verdict(
                r.f1_with >= 0.9 && r.f1_without <= 0.65,
                format!(
                    "test weighted F1 with readability {:.4}, without {:.4}, {:.1?}",
                    r.f1_with, r.f1_without, s.readability_time
                ),
            ),
            s.readability_time,
            SCENARIO_BUDGET,
        ),
        Err(e) => verdict(false, format!("error: {e}")),
    }
}

/// SMOG drives the labels; higher SMOG means Successful.
const PLANTED_INDEX: usize = 2;

fn criterion_7(s: &Scenarios) -> Verdict {
    match &s.readability {
        Ok(r) => {
            let g = r.mean_gradient;
            let largest = (0..5)
                .max_by(|&a, &b| g[a].abs().total_cmp(&g[b].abs()))
                .unwrap();
            verdict(
                largest == PLANTED_INDEX
                    && g[PLANTED_INDEX] > 0.0
                    && r.attribution_fd_max_rel < 1e-4,
                format!(
                    "mean gradient [fres {:+.3e}, fkg {:+.3e}, smog {:+.3e}, cli {:+.3e}, ari {:+.3e}]; \
                     finite-difference max rel {:.2e} over {} inputs",
                    g[0], g[1], g[2], g[3], g[4], r.attribution_fd_max_rel, r.attribution_fd_checked
                ),
            )
        }
        Err(e) => verdict(false, format!("error: {e}")),
    }
}

fn criterion_8(first: &Scenarios, root: &Path) -> Verdict {
    let second = run_scenarios(root);
    let collect = |s: &Scenarios| -> Option<Vec<(String, Vec<u8>)>> {
        let p = s.planted.as_ref().ok()?;
        let r = s.readability.as_ref().ok()?;
        Some(
            p.artifacts
                .0
                .iter()
                .chain(&r.artifacts.0)
                .cloned()
                .collect(),
        )
    };
    match (collect(first), collect(&second)) {
        (Some(a), Some(b)) => {
            let differing: Vec<&str> = a
                .iter()
                .zip(&b)
                .filter(|(x, y)| x != y)
                .map(|(x, _)| x.0.as_str())
                .collect();
            let bytes: usize = a.iter().map(|(_, v)| v.len()).sum();
            verdict(
                differing.is_empty() && a.len() == b.len(),
                if differing.is_empty() {
                    format!(
                        "{} artifacts ({bytes} bytes) identical across two runs",
                        a.len()
                    )
                } else {
                    format!("differing artifacts: {}", differing.join(", "))
                },
            )
        }
        _ => verdict(false, "a scenario run failed"),
    }
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Verdict {
    let run = || -> booksuccess::Result<Option<usize>> {
        let dir = tempfile::tempdir().map_err(|e| Error::Io {
            path: std::env::temp_dir(),
            source: e,
        })?;
        let corpus = random_label_corpus(dir.path(), 16, seed())?;
        let cfg = TrainConfig {
            seed: seed(),
            ..TrainConfig::default()
        };
        let feats = featurize_corpus(&corpus.train, &cfg.features)
            .into_iter()
            .collect::<booksuccess::Result<Vec<_>>>()?;
        let readability: Vec<_> = feats.iter().map(|f| f.readability).collect();
        let scaler = fit_scaler(&readability)?;
        let samples = prepare_samples(feats, &scaler);
        let ModelSpec::Cnn(spec) = &cfg.model else {
            unreachable!()
        };
        let model = Model::init_cnn(
            spec.model_config(samples[0].features.chunks.dim, cfg.features.n_chunks),
            cfg.seed,
        )?;
        let golds: Vec<SuccessLabel> = samples.iter().map(|s| s.label()).collect();
        let mut trainer = Trainer::new(model, AdamConfig::default(), cfg.batch_size, cfg.seed);
        for epoch in 1..=200 {
            trainer.run_epoch(&samples)?;
            let preds: Vec<SuccessLabel> =
                trainer.predict(&samples)?.iter().map(|p| p.label).collect();
            if weighted_f1(&preds, &golds)? == 1.0 {
                return Ok(Some(epoch));
            }
        }
        Ok(None)
    };
    let t = Instant::now();
    let result = run();
    let elapsed = t.elapsed();
    match result {
        Ok(Some(epoch)) => within_budget(
            verdict(
                true,
                format!("train weighted F1 1.0 after {epoch} epochs, {elapsed:.1?}"),
            ),
            elapsed,
            Duration::from_secs(60),
        ),
        Ok(None) => verdict(false, "train weighted F1 below 1.0 after 200 epochs"),
        Err(e) => verdict(false, format!("error: {e}")),
    }
}

// ---------------------------------------------------------------- 10

fn criterion_10() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    let mut mismatches = 0;
    for i in 0..100 {
        let n = rng.random_range(1..40);
        let dim = rng.random_range(1..64);
        let values: Vec<f32> = (0..n * dim)
            .map(|_| f32::from_bits(rng.random::<u32>() & 0xbf7f_ffff))
            .collect();
        let m = SentenceEmbeddingMatrix::new(n, dim, values).unwrap();
        let path = dir.path().join(format!("{i}.semb"));
        write_embeddings(&m, &path).unwrap();
        let back = load_embeddings(&path).unwrap();
        let same = back.n_sentences() == n
            && back.dim() == dim
            && back
                .values()
                .iter()
                .zip(m.values())
                .all(|(a, b)| a.to_bits() == b.to_bits());
        if !same {
            mismatches += 1;
        }
    }

    let good = encode_semb(&random_matrix(&mut rng, 10, 8));
    let mut bad_magic = good.clone();
    bad_magic[..4].copy_from_slice(b"XEMB");
    let mut bad_version = good.clone();
    bad_version[4..8].copy_from_slice(&2u32.to_le_bytes());
    let truncated = good[..good.len() - 8 * 4].to_vec();
    let mut nan = good.clone();
    let at = 16 + 4 * 5;
    nan[at..at + 4].copy_from_slice(&f32::NAN.to_le_bytes());
    let kinds = [
        matches!(decode_semb(&bad_magic), Err(Error::BadMagic { .. })),
        matches!(
            decode_semb(&bad_version),
            Err(Error::VersionMismatch { .. })
        ),
        matches!(decode_semb(&truncated), Err(Error::Truncated { .. })),
        matches!(decode_semb(&nan), Err(Error::NonFinite { .. })),
    ];
    let corrupt_ok = kinds.iter().all(|&k| k);
    verdict(
        mismatches == 0 && corrupt_ok,
        format!(
            "{mismatches}/100 round-trip mismatches; distinct errors for magic/version/truncation/NaN: {kinds:?}"
        ),
    )
}

// ----------------------------------------------------------------

const NAMES: [&str; 10] = [
    "readability exactness",
    "gradient correctness",
    "metric oracle equivalence",
    "chunking invariants",
    "end-to-end learning",
    "readability fusion effect",
    "attribution soundness",
    "determinism",
    "overfit sanity",
    "SEMB round trip",
];

fn main() -> ExitCode {
    let selected: BTreeSet<usize> = match std::env::var("ACCEPTANCE_ONLY") {
        Ok(list) => list
            .split(',')
            .filter_map(|s| s.trim().parse().ok())
            .collect(),
        Err(_) => (1..=10).collect(),
    };
    let needs_scenarios = [5, 6, 7, 8].iter().any(|c| selected.contains(c));
    let scratch = tempfile::tempdir().expect("temp dir");
    let scenario_root = scratch.path().join("scenarios");
    let mut scenarios = None;
    let mut failed = 0;
    for id in 1..=10 {
        if !selected.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let v = match id {
            1 => within_budget(criterion_1(), t.elapsed(), Duration::from_secs(1)),
            2 => {
                let v = criterion_2();
                within_budget(v, t.elapsed(), Duration::from_secs(30))
            }
            3 => {
                let v = criterion_3();
                within_budget(v, t.elapsed(), Duration::from_secs(5))
            }
            4 => {
                let v = criterion_4();
                within_budget(v, t.elapsed(), Duration::from_secs(5))
            }
            5..=8 => {
                if needs_scenarios && scenarios.is_none() {
                    scenarios = Some(run_scenarios(&scenario_root));
                }
                let s = scenarios.as_ref().expect("scenarios ran");
                match id {
                    5 => criterion_5(s),
                    6 => criterion_6(s),
                    7 => criterion_7(s),
                    _ => criterion_8(s, &scenario_root),
                }
            }
            9 => criterion_9(),
            _ => criterion_10(),
        };
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} [{}] {}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            NAMES[id - 1],
            v.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        println!("all selected criteria passed");
        ExitCode::SUCCESS
    }
}
