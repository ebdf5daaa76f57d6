//! Book corpora: manifests, success labels, splits and section selection.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

/// Ratings at or above this value mark a book as successful.
pub const SUCCESS_THRESHOLD: f64 = 3.5;

/// Expected manifest header, in order.
pub const MANIFEST_HEADER: [&str; 6] = [
    "book_id",
    "genre",
    "avg_rating",
    "n_ratings",
    "label",
    "text_path",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Genre {
    DetectiveMystery,
    Drama,
    Fiction,
    HistoricalFiction,
    LoveStories,
    Poetry,
    ScienceFiction,
    ShortStories,
}

impl Genre {
    pub const ALL: [Genre; 8] = [
        Genre::DetectiveMystery,
        Genre::Drama,
        Genre::Fiction,
        Genre::HistoricalFiction,
        Genre::LoveStories,
        Genre::Poetry,
        Genre::ScienceFiction,
        Genre::ShortStories,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Genre::DetectiveMystery => "DetectiveMystery",
            Genre::Drama => "Drama",
            Genre::Fiction => "Fiction",
            Genre::HistoricalFiction => "HistoricalFiction",
            Genre::LoveStories => "LoveStories",
            Genre::Poetry => "Poetry",
            Genre::ScienceFiction => "ScienceFiction",
            Genre::ShortStories => "ShortStories",
        }
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Returned when a string names none of the eight genres.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownGenre(pub String);

impl FromStr for Genre {
    type Err = UnknownGenre;

    /// Accepts the canonical names, ignoring case and any spaces, underscores
    /// or hyphens ("Science Fiction", "short_stories").
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        Genre::ALL
            .into_iter()
            .find(|g| g.name().to_lowercase() == key)
            .ok_or_else(|| UnknownGenre(s.to_string()))
    }
}

/// Binary success label. `Successful` is class index 0 throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuccessLabel {
    Successful,
    Unsuccessful,
}

impl SuccessLabel {
    pub fn class_index(self) -> usize {
        match self {
            SuccessLabel::Successful => 0,
            SuccessLabel::Unsuccessful => 1,
        }
    }

    pub fn from_class_index(index: usize) -> Self {
        if index == 0 {
            SuccessLabel::Successful
        } else {
            SuccessLabel::Unsuccessful
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SuccessLabel::Successful => "Successful",
            SuccessLabel::Unsuccessful => "Unsuccessful",
        }
    }
}

impl fmt::Display for SuccessLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuccessLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "successful" | "s" => Ok(SuccessLabel::Successful),
            "unsuccessful" | "u" => Ok(SuccessLabel::Unsuccessful),
            other => Err(Error::Domain(format!("unknown label {other:?}"))),
        }
    }
}

/// Maps an average rating on the 1-5 scale to a success label.
pub fn derive_label(avg_rating: f64) -> Result<SuccessLabel> {
    if !(1.0..=5.0).contains(&avg_rating) {
        return Err(Error::Domain(format!(
            "average rating {avg_rating} outside [1, 5]"
        )));
    }
    Ok(if avg_rating >= SUCCESS_THRESHOLD {
        SuccessLabel::Successful
    } else {
        SuccessLabel::Unsuccessful
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BookRecord {
    pub book_id: String,
    pub genre: Genre,
    pub avg_rating: Option<f64>,
    pub n_ratings: u64,
    pub label: SuccessLabel,
    /// Already resolved against the manifest directory.
    pub text_path: PathBuf,
}

impl BookRecord {
    pub fn read_text(&self) -> Result<String> {
        std::fs::read_to_string(&self.text_path).map_err(|e| Error::io(&self.text_path, e))
    }
}

/// An ordered, immutable collection of books.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusSet {
    pub records: Vec<BookRecord>,
    pub root: PathBuf,
}

impl CorpusSet {
    pub fn new(records: Vec<BookRecord>, root: impl Into<PathBuf>) -> Self {
        Self {
            records,
            root: root.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BookRecord> {
        self.records.iter()
    }

    pub fn labels(&self) -> Vec<SuccessLabel> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// Keeps the records at `indices`, in the order given.
    pub fn subset(&self, indices: &[usize]) -> CorpusSet {
        CorpusSet {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            root: self.root.clone(),
        }
    }
}

impl<'a> IntoIterator for &'a CorpusSet {
    type Item = &'a BookRecord;
    type IntoIter = std::slice::Iter<'a, BookRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

/// Loads a manifest CSV. Text paths are resolved relative to the manifest's
/// directory; an empty label column is filled from the rating.
pub fn load_corpus(manifest_path: impl AsRef<Path>) -> Result<CorpusSet> {
    let manifest_path = manifest_path.as_ref();
    let file = std::fs::File::open(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let root = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let malformed = |row: usize, message: String| Error::MalformedRow {
        path: manifest_path.to_path_buf(),
        row,
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file);
    let header = reader
        .headers()
        .map_err(|e| malformed(1, format!("unreadable header: {e}")))?;
    let header: Vec<&str> = header.iter().map(str::trim).collect();
    if header != MANIFEST_HEADER {
        return Err(malformed(
            1,
            format!(
                "header must be `{}`, found `{}`",
                MANIFEST_HEADER.join(","),
                header.join(",")
            ),
        ));
    }

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in reader.records().enumerate() {
        // Line 1 is the header.
        let row = row.map_err(|e| malformed(i + 2, e.to_string()))?;
        let row_no = row.position().map_or(i + 2, |p| p.line() as usize);
        let field = |k: usize| row.get(k).unwrap_or("").trim();

        let book_id = field(0);
        if book_id.is_empty() {
            return Err(malformed(row_no, "empty book_id".into()));
        }
        let genre = field(1)
            .parse::<Genre>()
            .map_err(|UnknownGenre(value)| Error::UnknownGenre { row: row_no, value })?;

        let avg_rating = match field(2) {
            "" => None,
            s => {
                let r: f64 = s
                    .parse()
                    .map_err(|_| malformed(row_no, format!("avg_rating {s:?} is not a number")))?;
                if !(1.0..=5.0).contains(&r) {
                    return Err(malformed(row_no, format!("avg_rating {r} outside [1, 5]")));
                }
                Some(r)
            }
        };
        let n_ratings = match field(3) {
            "" => 0,
            s => s.parse::<u64>().map_err(|_| {
                malformed(
                    row_no,
                    format!("n_ratings {s:?} is not a nonnegative integer"),
                )
            })?,
        };
        let given = match field(4) {
            "" => None,
            s => Some(
                s.parse::<SuccessLabel>()
                    .map_err(|_| malformed(row_no, format!("unknown label {s:?}")))?,
            ),
        };
        let label = match (given, avg_rating) {
            (None, None) => {
                return Err(malformed(
                    row_no,
                    "avg_rating and label cannot both be empty".into(),
                ))
            }
            (Some(label), None) => label,
            (None, Some(r)) => derive_label(r)?,
            (Some(label), Some(r)) => {
                if derive_label(r)? != label {
                    return Err(Error::LabelConflict {
                        row: row_no,
                        label: label.to_string(),
                        avg_rating: r,
                    });
                }
                label
            }
        };
        let text_path = field(5);
        if text_path.is_empty() {
            return Err(malformed(row_no, "empty text_path".into()));
        }
        if !seen.insert(book_id.to_string()) {
            return Err(Error::DuplicateBookId {
                row: row_no,
                book_id: book_id.to_string(),
            });
        }
        records.push(BookRecord {
            book_id: book_id.to_string(),
            genre,
            avg_rating,
            n_ratings,
            label,
            text_path: root.join(text_path),
        });
    }
    Ok(CorpusSet { records, root })
}

/// Writes records as a manifest CSV. Text paths are written relative to
/// `root` when possible.
pub fn write_manifest(corpus: &CorpusSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let to_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    w.write_record(MANIFEST_HEADER).map_err(to_err)?;
    for r in corpus {
        let text = r
            .text_path
            .strip_prefix(&corpus.root)
            .unwrap_or(&r.text_path)
            .to_string_lossy()
            .into_owned();
        let rating = r.avg_rating.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            r.book_id.as_str(),
            r.genre.name(),
            rating.as_str(),
            r.n_ratings.to_string().as_str(),
            r.label.name(),
            text.as_str(),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Splits uniformly at random (no stratification) into train and validation
/// sides. The validation side holds `round(val_fraction * n)` records; both
/// sides keep manifest order.
pub fn split_train_val(
    corpus: &CorpusSet,
    val_fraction: f64,
    seed: u64,
) -> Result<(CorpusSet, CorpusSet)> {
    let n = corpus.len();
    if n < 2 {
        return Err(Error::Split(format!("need at least 2 records, have {n}")));
    }
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::Split(format!(
            "validation fraction {val_fraction} outside (0, 1)"
        )));
    }
    let n_val = (val_fraction * n as f64).round() as usize;
    if n_val == 0 || n_val == n {
        return Err(Error::Split(format!(
            "fraction {val_fraction} of {n} records leaves an empty side"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::derive(seed, rng::streams::SPLIT));
    let mut val_idx = order[..n_val].to_vec();
    let mut train_idx = order[n_val..].to_vec();
    val_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((corpus.subset(&train_idx), corpus.subset(&val_idx)))
}

/// Which part of a book feeds the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SectionSpec {
    FirstK(usize),
    LastK(usize),
    #[default]
    Full,
}

impl SectionSpec {
    pub fn first(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("section size must be at least 1".into()));
        }
        Ok(SectionSpec::FirstK(k))
    }

    pub fn last(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("section size must be at least 1".into()));
        }
        Ok(SectionSpec::LastK(k))
    }
}

impl fmt::Display for SectionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectionSpec::FirstK(k) => write!(f, "first:{k}"),
            SectionSpec::LastK(k) => write!(f, "last:{k}"),
            SectionSpec::Full => f.write_str("full"),
        }
    }
}

impl FromStr for SectionSpec {
    type Err = Error;

    /// Parses `first:K`, `last:K` or `full`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("full") {
            return Ok(SectionSpec::Full);
        }
        let bad = || {
            Error::Config(format!(
                "bad section {s:?}; expected first:K, last:K or full"
            ))
        };
        let (kind, k) = s.split_once(':').ok_or_else(bad)?;
        let k: usize = k.trim().parse().map_err(|_| bad())?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "first" => SectionSpec::first(k),
            "last" => SectionSpec::last(k),
            _ => Err(bad()),
        }
    }
}

/// Index range of the section within `n` sentences.
pub fn section_range(n: usize, spec: SectionSpec) -> std::ops::Range<usize> {
    match spec {
        SectionSpec::FirstK(k) => 0..k.min(n),
        SectionSpec::LastK(k) => n - k.min(n)..n,
        SectionSpec::Full => 0..n,
    }
}

/// Selects a contiguous run of sentences. Short documents truncate.
pub fn select_section<T: Clone>(sentences: &[T], spec: SectionSpec) -> Vec<T> {
    sentences[section_range(sentences.len(), spec)].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn label_threshold_is_inclusive() {
        assert_eq!(derive_label(3.5).unwrap(), SuccessLabel::Successful);
        assert_eq!(derive_label(3.499).unwrap(), SuccessLabel::Unsuccessful);
        assert_eq!(derive_label(5.0).unwrap(), SuccessLabel::Successful);
        assert_eq!(derive_label(1.0).unwrap(), SuccessLabel::Unsuccessful);
    }

    #[test]
    fn label_rejects_out_of_range() {
        assert!(matches!(derive_label(0.99), Err(Error::Domain(_))));
        assert!(matches!(derive_label(5.01), Err(Error::Domain(_))));
        assert!(derive_label(f64::NAN).is_err());
    }

    #[test]
    fn genre_parsing() {
        assert_eq!(
            "Science Fiction".parse::<Genre>(),
            Ok(Genre::ScienceFiction)
        );
        assert_eq!("short_stories".parse::<Genre>(), Ok(Genre::ShortStories));
        assert_eq!("Poetry".parse::<Genre>(), Ok(Genre::Poetry));
        assert_eq!(
            "Western".parse::<Genre>(),
            Err(UnknownGenre("Western".into()))
        );
        for g in Genre::ALL {
            assert_eq!(g.name().parse::<Genre>(), Ok(g));
        }
    }

    fn toy_corpus(n: usize) -> CorpusSet {
        let records = (0..n)
            .map(|i| BookRecord {
                book_id: format!("b{i}"),
                genre: Genre::ALL[i % 8],
                avg_rating: Some(3.0 + (i % 3) as f64 * 0.5),
                n_ratings: 10,
                label: derive_label(3.0 + (i % 3) as f64 * 0.5).unwrap(),
                text_path: PathBuf::from(format!("b{i}.txt")),
            })
            .collect();
        CorpusSet::new(records, ".")
    }

    #[test]
    fn split_sizes_and_determinism() {
        let c = toy_corpus(100);
        let (t1, v1) = split_train_val(&c, 0.2, 7).unwrap();
        let (t2, v2) = split_train_val(&c, 0.2, 7).unwrap();
        assert_eq!((t1.len(), v1.len()), (80, 20));
        assert_eq!(t1, t2);
        assert_eq!(v1, v2);
    }

    #[test]
    fn split_seed_sensitivity() {
        let c = toy_corpus(10);
        let (_, v1) = split_train_val(&c, 0.2, 1).unwrap();
        let (_, v2) = split_train_val(&c, 0.2, 2).unwrap();
        assert_eq!(v1.len(), 2);
        assert_eq!(v2.len(), 2);
        let ids = |c: &CorpusSet| c.iter().map(|r| r.book_id.clone()).collect::<Vec<_>>();
        assert_ne!(ids(&v1), ids(&v2));
    }

    #[test]
    fn split_rejects_empty_side() {
        let c = toy_corpus(5);
        assert!(matches!(split_train_val(&c, 0.01, 0), Err(Error::Split(_))));
        assert!(matches!(split_train_val(&c, 0.99, 0), Err(Error::Split(_))));
        assert!(split_train_val(&toy_corpus(1), 0.5, 0).is_err());
    }

    #[test]
    fn sections() {
        let s: Vec<usize> = (1..=2000).collect();
        assert_eq!(
            select_section(&s, SectionSpec::FirstK(1000)),
            (1..=1000).collect::<Vec<_>>()
        );
        assert_eq!(
            select_section(&s, SectionSpec::LastK(1000)),
            (1001..=2000).collect::<Vec<_>>()
        );
        let short: Vec<usize> = (1..=700).collect();
        assert_eq!(select_section(&short, SectionSpec::FirstK(1000)), short);
        assert_eq!(select_section(&short, SectionSpec::LastK(1000)), short);
    }

    #[test]
    fn section_parse_roundtrip() {
        for spec in [
            SectionSpec::FirstK(1000),
            SectionSpec::LastK(5),
            SectionSpec::Full,
        ] {
            assert_eq!(spec.to_string().parse::<SectionSpec>().unwrap(), spec);
        }
        assert!("first:0".parse::<SectionSpec>().is_err());
        assert!("middle:3".parse::<SectionSpec>().is_err());
    }

    proptest! {
        #[test]
        fn split_partitions_corpus(n in 2usize..200, frac in 0.05f64..0.95, seed: u64) {
            let c = toy_corpus(n);
            let n_val = (frac * n as f64).round() as usize;
            match split_train_val(&c, frac, seed) {
                Ok((train, val)) => {
                    prop_assert_eq!(val.len(), n_val);
                    prop_assert_eq!(train.len() + val.len(), n);
                    let mut ids: Vec<String> = train.iter().chain(val.iter()).map(|r| r.book_id.clone()).collect();
                    ids.sort();
                    ids.dedup();
                    prop_assert_eq!(ids.len(), n);
                }
                Err(_) => prop_assert!(n_val == 0 || n_val == n),
            }
        }

        #[test]
        fn label_is_monotone(a in 1.0f64..=5.0, b in 1.0f64..=5.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if derive_label(lo).unwrap() == SuccessLabel::Successful {
                prop_assert_eq!(derive_label(hi).unwrap(), SuccessLabel::Successful);
            }
        }

        #[test]
        fn full_and_first_n_are_identity(s in proptest::collection::vec(any::<u16>(), 0..100)) {
            prop_assert_eq!(select_section(&s, SectionSpec::Full), s.clone());
            if !s.is_empty() {
                prop_assert_eq!(select_section(&s, SectionSpec::FirstK(s.len())), s.clone());
            }
        }
    }
}
