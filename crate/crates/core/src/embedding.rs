//! Sentence embeddings: a seeded hashed bag-of-words encoder, the `SEMB`
//! binary format for externally computed vectors, and averaging into a
//! fixed number of chunks.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::textstats::tokenize_words;

pub const SEMB_MAGIC: [u8; 4] = *b"SEMB";
pub const SEMB_VERSION: u32 = 1;
const SEMB_HEADER_LEN: usize = 16;

/// Default dimension of the hashed encoder.
pub const DEFAULT_DIM: usize = 512;
pub const MIN_HASHED_DIM: usize = 8;

/// One row per sentence, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbeddingMatrix {
    n_sentences: usize,
    dim: usize,
    values: Vec<f32>,
}

impl SentenceEmbeddingMatrix {
    pub fn new(n_sentences: usize, dim: usize, values: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("embedding dimension must be positive".into()));
        }
        if values.len() != n_sentences * dim {
            return Err(Error::Shape(format!(
                "{} values for a {n_sentences}x{dim} matrix",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            n_sentences,
            dim,
            values,
        })
    }

    pub fn n_sentences(&self) -> usize {
        self.n_sentences
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Rows `range`, as a new matrix.
    pub fn rows(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            n_sentences: range.len(),
            dim: self.dim,
            values: self.values[range.start * self.dim..range.end * self.dim].to_vec(),
        }
    }
}

/// `n_chunks` rows of chunk-averaged embeddings, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkSequence {
    pub n_chunks: usize,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl ChunkSequence {
    pub fn zeros(n_chunks: usize, dim: usize) -> Self {
        Self {
            n_chunks,
            dim,
            values: vec![0.0; n_chunks * dim],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("ragged chunk rows".into()));
        }
        Ok(Self {
            n_chunks: rows.len(),
            dim,
            values: rows.concat(),
        })
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }
}

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ splitmix(seed);
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix(h)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Bucket and sign for one token under `seed`.
pub fn hash_token(token: &str, dim: usize, seed: u64) -> (usize, f32) {
    let h = fnv1a(seed, token.to_lowercase().as_bytes());
    let bucket = (h % dim as u64) as usize;
    let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
    (bucket, sign)
}

/// Signed feature hashing of each sentence's lowercased tokens, L2-normalized
/// per sentence. Sentences without tokens map to the zero vector.
pub fn encode_hashed_bow<S: AsRef<str>>(
    sentences: &[S],
    dim: usize,
    seed: u64,
) -> Result<SentenceEmbeddingMatrix> {
    if dim < MIN_HASHED_DIM {
        return Err(Error::Domain(format!(
            "hashed encoder dimension must be at least {MIN_HASHED_DIM}, got {dim}"
        )));
    }
    let mut values = vec![0f32; sentences.len() * dim];
    let mut acc = vec![0f64; dim];
    for (row, s) in values.chunks_exact_mut(dim).zip(sentences) {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for tok in tokenize_words(s.as_ref()) {
            let (b, sign) = hash_token(tok, dim, seed);
            acc[b] += f64::from(sign);
        }
        let norm = acc.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (r, a) in row.iter_mut().zip(&acc) {
                *r = (a / norm) as f32;
            }
        }
    }
    SentenceEmbeddingMatrix::new(sentences.len(), dim, values)
}

pub fn encode_semb(matrix: &SentenceEmbeddingMatrix) -> Vec<u8> {
    let mut buf = Vec::with_capacity(SEMB_HEADER_LEN + matrix.values.len() * 4);
    buf.extend_from_slice(&SEMB_MAGIC);
    buf.extend_from_slice(&SEMB_VERSION.to_le_bytes());
    buf.extend_from_slice(&(matrix.n_sentences as u32).to_le_bytes());
    buf.extend_from_slice(&(matrix.dim as u32).to_le_bytes());
    for v in &matrix.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode_semb(bytes: &[u8]) -> Result<SentenceEmbeddingMatrix> {
    if bytes.len() < SEMB_HEADER_LEN {
        return Err(Error::Truncated {
            expected: SEMB_HEADER_LEN,
            found: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != SEMB_MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != SEMB_VERSION {
        return Err(Error::VersionMismatch {
            expected: SEMB_VERSION,
            found: version,
        });
    }
    let n = word(8) as usize;
    let dim = word(12) as usize;
    let expected = n
        .checked_mul(dim)
        .and_then(|x| x.checked_mul(4))
        .and_then(|x| x.checked_add(SEMB_HEADER_LEN))
        .ok_or_else(|| Error::Shape(format!("declared {n}x{dim} overflows")))?;
    if bytes.len() != expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    let values = bytes[SEMB_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    SentenceEmbeddingMatrix::new(n, dim, values)
}

/// Writes to a temporary sibling file and renames it into place.
pub fn write_embeddings(matrix: &SentenceEmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_semb(matrix))
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<SentenceEmbeddingMatrix> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_semb(&bytes)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = std::fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|()| std::fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// Balanced contiguous partition sizes: the first `n % n_chunks` chunks get
/// one extra sentence. With fewer sentences than chunks the tail is empty.
pub fn chunk_sizes(n_sentences: usize, n_chunks: usize) -> Vec<usize> {
    assert!(n_chunks >= 1, "n_chunks must be positive");
    let base = n_sentences / n_chunks;
    let extra = n_sentences % n_chunks;
    (0..n_chunks)
        .map(|k| base + usize::from(k < extra))
        .collect()
}

/// Averages contiguous groups of sentence rows into `n_chunks` rows; chunks
/// with no sentences are zero rows.
pub fn chunk_average(matrix: &SentenceEmbeddingMatrix, n_chunks: usize) -> Result<ChunkSequence> {
    if n_chunks == 0 {
        return Err(Error::Domain("n_chunks must be positive".into()));
    }
    let dim = matrix.dim;
    let mut out = ChunkSequence::zeros(n_chunks, dim);
    let mut next = 0usize;
    for (k, size) in chunk_sizes(matrix.n_sentences, n_chunks)
        .into_iter()
        .enumerate()
    {
        if size == 0 {
            continue;
        }
        let row = &mut out.values[k * dim..(k + 1) * dim];
        for i in next..next + size {
            for (acc, &v) in row.iter_mut().zip(matrix.row(i)) {
                *acc += f64::from(v);
            }
        }
        row.iter_mut().for_each(|x| *x /= size as f64);
        next += size;
    }
    Ok(out)
}

/// Mean of all sentence rows.
pub fn book_average(matrix: &SentenceEmbeddingMatrix) -> Result<Vec<f64>> {
    if matrix.n_sentences == 0 {
        return Err(Error::Domain(
            "cannot average an empty embedding matrix".into(),
        ));
    }
    let mut mean = vec![0f64; matrix.dim];
    for i in 0..matrix.n_sentences {
        for (m, &v) in mean.iter_mut().zip(matrix.row(i)) {
            *m += f64::from(v);
        }
    }
    mean.iter_mut()
        .for_each(|m| *m /= matrix.n_sentences as f64);
    Ok(mean)
}
