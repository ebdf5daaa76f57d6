//! Generated corpora with known structure, used to check that the pipeline
//! learns what it should.
//!
//! Words are pseudo-words over the vowels `a i o u`, so the syllable counter
//! sees exactly one syllable per vowel and every text statistic is under the
//! generator's control.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::corpus::{split_train_val, write_manifest, BookRecord, CorpusSet, Genre, SuccessLabel};
use crate::embedding::{write_embeddings, SentenceEmbeddingMatrix};
use crate::error::{Error, Result};
use crate::readability::smog;
use crate::rng::{self, Rng};
use crate::textstats::{compute_counts, segment_sentences};

/// Per-genre (unsuccessful, successful) book counts of the reference corpus,
/// in [`Genre::ALL`] order.
pub const GENRE_COUNTS: [(usize, usize); 8] = [
    (60, 46),
    (29, 70),
    (30, 81),
    (16, 65),
    (20, 60),
    (23, 158),
    (48, 39),
    (123, 135),
];

const TEST_SPLIT_SALT: u64 = 0x7e57_5911;
const VOWELS: &[u8] = b"aiou";
const CONSONANTS: &[u8] = b"bdfghklmnprstvw";
const MARKER_CONSONANTS: &[u8] = b"qxz";

/// A generated corpus on disk plus its train/test split.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub root: PathBuf,
    pub all: CorpusSet,
    pub train: CorpusSet,
    pub test: CorpusSet,
    /// Set when the books come with external `.semb` embeddings.
    pub semb_dir: Option<PathBuf>,
}

/// `n` (genre, label) slots following the reference genre sizes and
/// per-genre success rates, in a seeded random order.
pub fn genre_plan(n: usize, rng: &mut impl rand::Rng) -> Vec<(Genre, SuccessLabel)> {
    let total: usize = GENRE_COUNTS.iter().map(|(u, s)| u + s).sum();
    let exact: Vec<f64> = GENRE_COUNTS
        .iter()
        .map(|(u, s)| (u + s) as f64 * n as f64 / total as f64)
        .collect();
    let mut sizes: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut by_remainder: Vec<usize> = (0..sizes.len()).collect();
    by_remainder.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let short = n - sizes.iter().sum::<usize>();
    for &g in by_remainder.iter().take(short) {
        sizes[g] += 1;
    }
    let mut plan = Vec::with_capacity(n);
    for ((genre, size), (u, s)) in Genre::ALL.iter().zip(sizes).zip(GENRE_COUNTS) {
        let successes = (size as f64 * s as f64 / (u + s) as f64).round() as usize;
        for i in 0..size {
            let label = if i < successes {
                SuccessLabel::Successful
            } else {
                SuccessLabel::Unsuccessful
            };
            plan.push((*genre, label));
        }
    }
    plan.shuffle(rng);
    plan
}

fn pick(rng: &mut Rng, set: &[u8]) -> char {
    set[rng.random_range(0..set.len())] as char
}

/// A word with exactly `syllables` vowel groups and `len` letters
/// (at least `2 * syllables`).
fn pseudo_word(rng: &mut Rng, syllables: usize, len: usize, consonants: &[u8]) -> String {
    let mut parts: Vec<String> = (0..syllables)
        .map(|_| format!("{}{}", pick(rng, consonants), pick(rng, VOWELS)))
        .collect();
    for _ in 2 * syllables..len {
        let slot = rng.random_range(0..parts.len());
        parts[slot].push(pick(rng, consonants));
    }
    parts.concat()
}

fn sentence_text(words: &[String]) -> String {
    let mut s = words.join(" ");
    if let Some(first) = s.get(..1) {
        let upper = first.to_ascii_uppercase();
        s.replace_range(..1, &upper);
    }
    s.push('.');
    s
}

fn rating_for(label: SuccessLabel, rng: &mut Rng) -> f64 {
    let r = match label {
        SuccessLabel::Successful => 3.5 + rng.random::<f64>() * 1.3,
        SuccessLabel::Unsuccessful => 2.0 + rng.random::<f64>() * 1.45,
    };
    (r * 100.0).round() / 100.0
}

fn write_book(root: &Path, book_id: &str, text: &str) -> Result<PathBuf> {
    let path = root.join("texts").join(format!("{book_id}.txt"));
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn prepare_dir(root: &Path) -> Result<()> {
    let texts = root.join("texts");
    std::fs::create_dir_all(&texts).map_err(|e| Error::io(&texts, e))
}

fn finish(
    root: &Path,
    records: Vec<BookRecord>,
    test_fraction: f64,
    seed: u64,
    semb_dir: Option<PathBuf>,
) -> Result<SyntheticCorpus> {
    let all = CorpusSet::new(records, root);
    write_manifest(&all, root.join("manifest.csv"))?;
    // Offset so the held-out split is unrelated to the validation split a
    // trainer with the same seed draws from the training side.
    let (train, test) = split_train_val(&all, test_fraction, seed ^ TEST_SPLIT_SALT)?;
    write_manifest(&train, root.join("train.csv"))?;
    write_manifest(&test, root.join("test.csv"))?;
    Ok(SyntheticCorpus {
        root: root.to_path_buf(),
        all,
        train,
        test,
        semb_dir,
    })
}

/// Labels determined by planted marker words: every book's sentences carry
/// markers of its own class only, mixed into random filler.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub n_books: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub min_sentences: usize,
    pub max_sentences: usize,
    /// Probability that a sentence contains a marker word.
    pub marker_rate: f64,
    pub vocabulary: usize,
    pub markers_per_class: usize,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            n_books: 200,
            test_fraction: 0.25,
            seed: 0,
            min_sentences: 40,
            max_sentences: 80,
            marker_rate: 0.5,
            vocabulary: 1000,
            markers_per_class: 3,
        }
    }
}

pub fn planted_corpus(root: impl AsRef<Path>, cfg: &PlantedConfig) -> Result<SyntheticCorpus> {
    let root = root.as_ref();
    prepare_dir(root)?;
    let mut rng = rng::derive(cfg.seed, rng::streams::SYNTH);
    let vocab: Vec<String> = (0..cfg.vocabulary)
        .map(|_| {
            let syl = rng.random_range(1..=3);
            let len = 2 * syl + rng.random_range(0..3);
            pseudo_word(&mut rng, syl, len, CONSONANTS)
        })
        .collect();
    let markers: [Vec<String>; 2] = std::array::from_fn(|_| {
        (0..cfg.markers_per_class)
            .map(|_| pseudo_word(&mut rng, 2, 6, MARKER_CONSONANTS))
            .collect()
    });
    let plan = genre_plan(cfg.n_books, &mut rng);
    let mut records = Vec::with_capacity(plan.len());
    for (i, (genre, label)) in plan.into_iter().enumerate() {
        let book_id = format!("p{i:04}");
        let n_sent = rng.random_range(cfg.min_sentences..=cfg.max_sentences);
        let own = &markers[label.class_index()];
        let sentences: Vec<String> = (0..n_sent)
            .map(|_| {
                let n_words = rng.random_range(6..=14);
                let mut words: Vec<String> = (0..n_words)
                    .map(|_| vocab[rng.random_range(0..vocab.len())].clone())
                    .collect();
                if rng.random::<f64>() < cfg.marker_rate {
                    let at = rng.random_range(0..words.len());
                    words[at] = own[rng.random_range(0..own.len())].clone();
                }
                sentence_text(&words)
            })
            .collect();
        let text_path = write_book(root, &book_id, &sentences.join(" "))?;
        records.push(BookRecord {
            avg_rating: Some(rating_for(label, &mut rng)),
            n_ratings: rng.random_range(10..5000),
            book_id,
            genre,
            label,
            text_path,
        });
    }
    finish(root, records, cfg.test_fraction, cfg.seed, None)
}

/// Labels determined by SMOG alone, with pure-noise sentence embeddings.
///
/// Each book draws words per sentence, syllables per word and characters per
/// word independently of its label, so only the polysyllable density (and
/// therefore SMOG) separates the classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadabilityCorpusConfig {
    pub n_books: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub min_sentences: usize,
    pub max_sentences: usize,
    pub noise_dim: usize,
}

impl Default for ReadabilityCorpusConfig {
    fn default() -> Self {
        Self {
            n_books: 300,
            test_fraction: 0.3,
            seed: 0,
            min_sentences: 30,
            max_sentences: 50,
            noise_dim: 64,
        }
    }
}

/// Polysyllables per sentence at the class boundary.
pub const PLANTED_POLY_PER_SENTENCE: f64 = 1.8;

/// SMOG value at [`PLANTED_POLY_PER_SENTENCE`].
pub fn planted_smog_threshold() -> f64 {
    1.0430 * (30.0 * PLANTED_POLY_PER_SENTENCE).sqrt() + 3.1291
}

fn readability_text(rng: &mut Rng, n_sent: usize, successful: bool) -> String {
    let wps = rng.random_range(10.0..18.0);
    let pps = if successful {
        rng.random_range(2.2..3.2)
    } else {
        rng.random_range(0.4..1.4)
    };
    let spw = rng.random_range(1.7..1.95);
    let cpw = rng.random_range(7.0..9.0);

    let n_words = (wps * n_sent as f64).round() as usize;
    let n_poly = ((pps * n_sent as f64).round() as usize).min(n_words);
    let mut syllables = vec![1usize; n_words];
    let mut order: Vec<usize> = (0..n_words).collect();
    order.shuffle(rng);
    for &i in &order[..n_poly] {
        syllables[i] = 3;
    }
    let target_syllables = (spw * n_words as f64).round() as usize;
    let base = 3 * n_poly + (n_words - n_poly);
    let n_two = target_syllables.saturating_sub(base).min(n_words - n_poly);
    for &i in &order[n_poly..n_poly + n_two] {
        syllables[i] = 2;
    }
    let mut lengths: Vec<usize> = syllables.iter().map(|s| 2 * s).collect();
    let target_chars = (cpw * n_words as f64).round() as usize;
    for _ in lengths.iter().sum::<usize>()..target_chars {
        let i = rng.random_range(0..n_words);
        lengths[i] += 1;
    }
    let words: Vec<String> = syllables
        .iter()
        .zip(&lengths)
        .map(|(&s, &l)| pseudo_word(rng, s, l, CONSONANTS))
        .collect();

    // Balanced sentence lengths, with the word order already random.
    let mut sentences = Vec::with_capacity(n_sent);
    let mut start = 0;
    for k in 0..n_sent {
        let len = n_words / n_sent + usize::from(k < n_words % n_sent);
        sentences.push(sentence_text(&words[start..start + len]));
        start += len;
    }
    sentences.join(" ")
}

pub fn readability_corpus(
    root: impl AsRef<Path>,
    cfg: &ReadabilityCorpusConfig,
) -> Result<SyntheticCorpus> {
    let root = root.as_ref();
    prepare_dir(root)?;
    let semb_dir = root.join("semb");
    std::fs::create_dir_all(&semb_dir).map_err(|e| Error::io(&semb_dir, e))?;
    let mut rng = rng::derive(cfg.seed, rng::streams::SYNTH);
    let genres: Vec<Genre> = genre_plan(cfg.n_books, &mut rng)
        .into_iter()
        .map(|(g, _)| g)
        .collect();
    let threshold = planted_smog_threshold();
    let mut records = Vec::with_capacity(cfg.n_books);
    for (i, genre) in genres.into_iter().enumerate() {
        let book_id = format!("r{i:04}");
        let n_sent = rng.random_range(cfg.min_sentences..=cfg.max_sentences);
        let text = readability_text(&mut rng, n_sent, i % 2 == 0);
        let label = if smog(&compute_counts(&text))? >= threshold {
            SuccessLabel::Successful
        } else {
            SuccessLabel::Unsuccessful
        };
        let rows = segment_sentences(&text).len();
        let noise: Vec<f32> = (0..rows * cfg.noise_dim)
            .map(|_| rng.random_range(-1.0f32..1.0))
            .collect();
        let matrix = SentenceEmbeddingMatrix::new(rows, cfg.noise_dim, noise)?;
        write_embeddings(&matrix, semb_dir.join(format!("{book_id}.semb")))?;
        let text_path = write_book(root, &book_id, &text)?;
        records.push(BookRecord {
            avg_rating: Some(rating_for(label, &mut rng)),
            n_ratings: rng.random_range(10..5000),
            book_id,
            genre,
            label,
            text_path,
        });
    }
    finish(root, records, cfg.test_fraction, cfg.seed, Some(semb_dir))
}

/// Small corpus of unrelated random texts with random labels. Everything
/// is in `train`; `test` is empty.
pub fn random_label_corpus(
    root: impl AsRef<Path>,
    n_books: usize,
    seed: u64,
) -> Result<SyntheticCorpus> {
    let root = root.as_ref();
    prepare_dir(root)?;
    let mut rng = rng::derive(seed, rng::streams::SYNTH);
    let mut labels: Vec<SuccessLabel> = (0..n_books)
        .map(|i| SuccessLabel::from_class_index(i % 2))
        .collect();
    labels.shuffle(&mut rng);
    let mut records = Vec::with_capacity(n_books);
    for (i, label) in labels.into_iter().enumerate() {
        let book_id = format!("o{i:04}");
        let n_sent = rng.random_range(20..=40);
        let sentences: Vec<String> = (0..n_sent)
            .map(|_| {
                let words: Vec<String> = (0..rng.random_range(5..=12))
                    .map(|_| {
                        let syl = rng.random_range(1..=3);
                        pseudo_word(&mut rng, syl, 2 * syl + 1, CONSONANTS)
                    })
                    .collect();
                sentence_text(&words)
            })
            .collect();
        let text_path = write_book(root, &book_id, &sentences.join(" "))?;
        records.push(BookRecord {
            avg_rating: Some(rating_for(label, &mut rng)),
            n_ratings: 100,
            book_id,
            genre: Genre::ALL[i % Genre::ALL.len()],
            label,
            text_path,
        });
    }
    let all = CorpusSet::new(records, root);
    write_manifest(&all, root.join("manifest.csv"))?;
    Ok(SyntheticCorpus {
        root: root.to_path_buf(),
        train: all.clone(),
        test: CorpusSet::new(Vec::new(), root),
        all,
        semb_dir: None,
    })
}
