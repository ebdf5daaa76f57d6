//! `BPMD` model checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "BPMD" | version u32
//! u32 byte length | UTF-8 `key=value` lines (model config, then extra metadata)
//! u32 tensor count | per tensor: u32 length, then length f32 values
//! u8 scaler flag | if 1: 5 f64 means, 5 f64 standard deviations
//! ```

use std::path::Path;

use super::config::ModelConfig;
use super::model::{Book2VecModel, CnnModel, Model};
use crate::embedding::write_atomic;
use crate::error::{Error, Result};
use crate::readability::{ReadabilityScaler, N_INDICES};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"BPMD";
pub const CHECKPOINT_VERSION: u32 = 1;

/// A trained model with everything needed to featurize new books the same
/// way it was trained.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub scaler: Option<ReadabilityScaler>,
    /// Extra `key=value` pairs stored after the model config, in order.
    pub metadata: Vec<(String, String)>,
}

impl Checkpoint {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

fn config_lines(model: &Model) -> Vec<(String, String)> {
    let mut kv = vec![("model".to_string(), model.kind().to_string())];
    let mut push = |k: &str, v: String| kv.push((k.to_string(), v));
    match model {
        Model::Cnn(m) => {
            let c = &m.config;
            let ws: Vec<String> = c.window_sizes.iter().map(usize::to_string).collect();
            push("model.window_sizes", ws.join(","));
            push("model.filters_per_window", c.filters_per_window.to_string());
            push("model.hidden_units", c.hidden_units.to_string());
            push("model.dropout_p", c.dropout_p.to_string());
            push("model.input_dim", c.input_dim.to_string());
            push("model.n_chunks", c.n_chunks.to_string());
            push("model.use_readability", c.use_readability.to_string());
        }
        Model::Book2Vec(m) => {
            push("model.input_dim", m.input_dim.to_string());
            push("model.hidden_units", m.hidden_units.to_string());
        }
    }
    kv
}

pub fn encode_checkpoint(ck: &Checkpoint) -> Result<Vec<u8>> {
    let mut text = String::new();
    for (k, v) in config_lines(&ck.model).iter().chain(&ck.metadata) {
        if k.contains(['=', '\n']) || v.contains('\n') {
            return Err(Error::Checkpoint(format!(
                "unencodable metadata {k:?}={v:?}"
            )));
        }
        text.push_str(&format!("{k}={v}\n"));
    }
    let mut buf = Vec::new();
    buf.extend_from_slice(&CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(text.len() as u32).to_le_bytes());
    buf.extend_from_slice(text.as_bytes());
    let tensors = ck.model.tensors();
    buf.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for t in tensors {
        buf.extend_from_slice(&(t.len() as u32).to_le_bytes());
        for &x in t {
            buf.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    match &ck.scaler {
        None => buf.push(0),
        Some(s) => {
            buf.push(1);
            for x in s.mean.iter().chain(&s.std) {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    Ok(buf)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(Error::Truncated {
                expected: self.pos.saturating_add(n),
                found: self.bytes.len(),
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn parse_config(kv: &[(String, String)]) -> Result<(Model, Vec<(String, String)>)> {
    let get = |k: &str| {
        kv.iter()
            .find(|(key, _)| key == k)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Checkpoint(format!("missing key {k}")))
    };
    fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T> {
        v.parse()
            .map_err(|_| Error::Checkpoint(format!("bad value for {k}: {v:?}")))
    }
    let model = match get("model")? {
        "cnn" => {
            let window_sizes = get("model.window_sizes")?
                .split(',')
                .map(|w| num::<usize>("model.window_sizes", w))
                .collect::<Result<Vec<_>>>()?;
            let config = ModelConfig {
                window_sizes,
                filters_per_window: num(
                    "model.filters_per_window",
                    get("model.filters_per_window")?,
                )?,
                hidden_units: num("model.hidden_units", get("model.hidden_units")?)?,
                dropout_p: num("model.dropout_p", get("model.dropout_p")?)?,
                input_dim: num("model.input_dim", get("model.input_dim")?)?,
                n_chunks: num("model.n_chunks", get("model.n_chunks")?)?,
                use_readability: num("model.use_readability", get("model.use_readability")?)?,
            };
            config.validate()?;
            Model::Cnn(CnnModel::zeros(config))
        }
        "book2vec" => Model::Book2Vec(Book2VecModel::zeros(
            num("model.input_dim", get("model.input_dim")?)?,
            num("model.hidden_units", get("model.hidden_units")?)?,
        )),
        other => return Err(Error::Checkpoint(format!("unknown model kind {other:?}"))),
    };
    let own: Vec<String> = config_lines(&model).into_iter().map(|(k, _)| k).collect();
    let extra = kv
        .iter()
        .filter(|(k, _)| !own.contains(k))
        .cloned()
        .collect();
    Ok((model, extra))
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic: [u8; 4] = cur.take(4)?.try_into().unwrap();
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let version = cur.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::VersionMismatch {
            expected: CHECKPOINT_VERSION,
            found: version,
        });
    }
    let text_len = cur.u32()? as usize;
    let text = std::str::from_utf8(cur.take(text_len)?)
        .map_err(|_| Error::Checkpoint("config block is not UTF-8".into()))?;
    let kv: Vec<(String, String)> = text
        .lines()
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Checkpoint(format!("bad config line {l:?}")))
        })
        .collect::<Result<_>>()?;
    let (mut model, metadata) = parse_config(&kv)?;

    let n_tensors = cur.u32()? as usize;
    let expected = model.tensors().len();
    if n_tensors != expected {
        return Err(Error::Checkpoint(format!(
            "{n_tensors} tensors stored, config implies {expected}"
        )));
    }
    let mut flat_index = 0;
    for t in model.tensors_mut() {
        let len = cur.u32()? as usize;
        if len != t.len() {
            return Err(Error::Checkpoint(format!(
                "tensor of length {len} where config implies {}",
                t.len()
            )));
        }
        let raw = cur.take(len * 4)?;
        for (x, c) in t.iter_mut().zip(raw.chunks_exact(4)) {
            let v = f32::from_le_bytes(c.try_into().unwrap());
            if !v.is_finite() {
                return Err(Error::NonFinite { index: flat_index });
            }
            *x = f64::from(v);
            flat_index += 1;
        }
    }
    let scaler = match cur.take(1)?[0] {
        0 => None,
        1 => {
            let mut vals = [0.0; 2 * N_INDICES];
            for v in &mut vals {
                *v = cur.f64()?;
            }
            Some(ReadabilityScaler {
                mean: vals[..N_INDICES].try_into().unwrap(),
                std: vals[N_INDICES..].try_into().unwrap(),
            })
        }
        f => return Err(Error::Checkpoint(format!("bad scaler flag {f}"))),
    };
    if cur.pos != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes",
            bytes.len() - cur.pos
        )));
    }
    Ok(Checkpoint {
        model,
        scaler,
        metadata,
    })
}

pub fn write_checkpoint(ck: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_checkpoint(ck)?)
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cnn_checkpoint() -> Checkpoint {
        let config = ModelConfig {
            window_sizes: vec![2, 3],
            filters_per_window: 2,
            hidden_units: 3,
            dropout_p: 0.6,
            input_dim: 5,
            n_chunks: 6,
            use_readability: true,
        };
        let mut model = Model::init_cnn(config, 3).unwrap();
        model.round_to_f32();
        Checkpoint {
            model,
            scaler: Some(ReadabilityScaler {
                mean: [1.0, 2.0, 3.0, 4.0, 5.0],
                std: [0.5, 1.0, 1.5, 2.0, 2.5],
            }),
            metadata: vec![("feature.section".into(), "first:1000".into())],
        }
    }

    #[test]
    fn roundtrip_cnn_and_book2vec() {
        let ck = cnn_checkpoint();
        let bytes = encode_checkpoint(&ck).unwrap();
        assert_eq!(&bytes[..4], b"BPMD");
        assert_eq!(decode_checkpoint(&bytes).unwrap(), ck);

        let mut model = Model::build_book2vec(7, 4, 0).unwrap();
        model.round_to_f32();
        let ck = Checkpoint {
            model,
            scaler: None,
            metadata: vec![],
        };
        assert_eq!(
            decode_checkpoint(&encode_checkpoint(&ck).unwrap()).unwrap(),
            ck
        );
    }

    #[test]
    fn corrupt_inputs() {
        let bytes = encode_checkpoint(&cnn_checkpoint()).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            decode_checkpoint(&bad),
            Err(Error::BadMagic { .. })
        ));
        let mut v = bytes.clone();
        v[4] = 9;
        assert!(matches!(
            decode_checkpoint(&v),
            Err(Error::VersionMismatch { .. })
        ));
        assert!(decode_checkpoint(&bytes[..bytes.len() - 3]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(decode_checkpoint(&long).is_err());
    }
}
