//! `key=value` configuration: one pair per line, `#` starts a comment.
//! Keys mirror the training configuration with dotted names.

use std::path::{Path, PathBuf};

use booksuccess::pipeline::{CnnSpec, EncoderConfig, ModelSpec, TrainConfig};
use booksuccess::SectionSpec;

/// Keys accepted in config files and `--set`.
pub const KEYS: &[&str] = &[
    "epochs",
    "batch_size",
    "seed",
    "val_fraction",
    "section",
    "n_chunks",
    "encoder",
    "encoder.dim",
    "encoder.seed",
    "encoder.dir",
    "readability.fkg_paper_sign",
    "model",
    "model.window_sizes",
    "model.filters_per_window",
    "model.hidden_units",
    "model.dropout_p",
    "model.use_readability",
    "adam.lr",
    "adam.beta1",
    "adam.beta2",
    "adam.eps",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub key: String,
    pub value: String,
    /// Where the setting came from, for error messages.
    pub origin: String,
}

pub fn parse_config(text: &str, source: &str) -> Result<Vec<Setting>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let origin = format!("{source}:{}", i + 1);
        out.push(parse_pair(line, origin)?);
    }
    Ok(out)
}

pub fn parse_pair(pair: &str, origin: String) -> Result<Setting, String> {
    let (key, value) = pair
        .split_once('=')
        .ok_or_else(|| format!("{origin}: expected key=value, got {pair:?}"))?;
    let key = key.trim();
    if !KEYS.contains(&key) {
        return Err(format!("{origin}: unknown key {key:?}"));
    }
    Ok(Setting {
        key: key.to_string(),
        value: value.trim().to_string(),
        origin,
    })
}

pub fn read_config(path: &Path) -> Result<Vec<Setting>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse_config(&text, &path.display().to_string())
}

fn parse<T: std::str::FromStr>(s: &Setting) -> Result<T, String> {
    s.value
        .parse()
        .map_err(|_| format!("{}: bad value {:?} for {}", s.origin, s.value, s.key))
}

fn cnn_spec(cfg: &mut TrainConfig) -> &mut CnnSpec {
    if !matches!(cfg.model, ModelSpec::Cnn(_)) {
        cfg.model = ModelSpec::Cnn(CnnSpec::default());
    }
    match &mut cfg.model {
        ModelSpec::Cnn(spec) => spec,
        ModelSpec::Book2Vec { .. } => unreachable!(),
    }
}

/// Applies settings in order; later settings win.
pub fn apply(cfg: &mut TrainConfig, settings: &[Setting]) -> Result<(), String> {
    // Model kind first, so `model.*` keys land on the chosen model whatever
    // the order they were written in.
    for s in settings.iter().filter(|s| s.key == "model") {
        cfg.model = match s.value.as_str() {
            "cnn" => ModelSpec::Cnn(CnnSpec::default()),
            "book2vec" => ModelSpec::book2vec(),
            _ => return Err(format!("{}: model must be cnn or book2vec", s.origin)),
        };
    }
    for s in settings {
        match s.key.as_str() {
            "model" => {}
            "epochs" => cfg.epochs = parse(s)?,
            "batch_size" => cfg.batch_size = parse(s)?,
            "seed" => cfg.seed = parse(s)?,
            "val_fraction" => cfg.val_fraction = parse(s)?,
            "section" => {
                cfg.features.section = s
                    .value
                    .parse::<SectionSpec>()
                    .map_err(|e| format!("{}: {e}", s.origin))?
            }
            "n_chunks" => cfg.features.n_chunks = parse(s)?,
            "encoder" => {
                cfg.features.encoder = match s.value.as_str() {
                    "hashed" => EncoderConfig::default(),
                    "semb" => EncoderConfig::ExternalSemb {
                        dir: PathBuf::from("."),
                    },
                    _ => return Err(format!("{}: encoder must be hashed or semb", s.origin)),
                }
            }
            "encoder.dim" | "encoder.seed" => {
                let (mut dim, mut seed) = match cfg.features.encoder {
                    EncoderConfig::HashedBow { dim, seed } => (dim, seed),
                    EncoderConfig::ExternalSemb { .. } => {
                        return Err(format!("{}: {} needs encoder=hashed", s.origin, s.key))
                    }
                };
                if s.key == "encoder.dim" {
                    dim = parse(s)?;
                } else {
                    seed = parse(s)?;
                }
                cfg.features.encoder = EncoderConfig::HashedBow { dim, seed };
            }
            "encoder.dir" => {
                cfg.features.encoder = EncoderConfig::ExternalSemb {
                    dir: PathBuf::from(&s.value),
                }
            }
            "readability.fkg_paper_sign" => cfg.features.readability.fkg_paper_sign = parse(s)?,
            "model.window_sizes" => {
                let sizes = s
                    .value
                    .split(',')
                    .map(|w| w.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| format!("{}: window sizes must be like 2,3,5,7", s.origin))?;
                cnn_spec(cfg).window_sizes = sizes;
            }
            "model.filters_per_window" => cnn_spec(cfg).filters_per_window = parse(s)?,
            "model.hidden_units" => match &mut cfg.model {
                ModelSpec::Cnn(spec) => spec.hidden_units = parse(s)?,
                ModelSpec::Book2Vec { hidden_units } => *hidden_units = parse(s)?,
            },
            "model.dropout_p" => cnn_spec(cfg).dropout_p = parse(s)?,
            "model.use_readability" => cnn_spec(cfg).use_readability = parse(s)?,
            "adam.lr" => cfg.adam.lr = parse(s)?,
            "adam.beta1" => cfg.adam.beta1 = parse(s)?,
            "adam.beta2" => cfg.adam.beta2 = parse(s)?,
            "adam.eps" => cfg.adam.eps = parse(s)?,
            other => return Err(format!("{}: unknown key {other:?}", s.origin)),
        }
    }
    Ok(())
}
