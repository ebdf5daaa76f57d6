//! The convolutional classifier, the Book2Vec baseline, and a common
//! [`Model`] wrapper that the training loop and checkpoints work with.

use rand::Rng;

use super::config::ModelConfig;
use super::layers::{ConvBank, Dense, PoolTrace};
use super::loss::softmax;
use crate::corpus::SuccessLabel;
use crate::embedding::ChunkSequence;
use crate::error::{Error, Result};
use crate::readability::N_INDICES;
use crate::rng;

pub const N_CLASSES: usize = 2;

/// Two logits; index 0 is `Successful`.
pub type Logits = [f64; N_CLASSES];

/// Default hidden width of the Book2Vec head (same as the CNN head).
pub const DEFAULT_BOOK2VEC_HIDDEN: usize = 50;

/// What a model consumes for one book.
#[derive(Debug, Clone, Copy)]
pub enum Input<'a> {
    Chunks {
        chunks: &'a ChunkSequence,
        readability: Option<&'a [f64; N_INDICES]>,
    },
    /// A single averaged book embedding.
    Vector(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    pub config: ModelConfig,
    pub convs: Vec<ConvBank>,
    pub dense1: Dense,
    pub dense2: Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Book2VecModel {
    pub input_dim: usize,
    pub hidden_units: usize,
    pub dense1: Dense,
    pub dense2: Dense,
}

/// Intermediate values of a CNN forward pass.
#[derive(Debug, Clone)]
pub struct CnnCache {
    pub input: Vec<f64>,
    pub pools: Vec<Vec<PoolTrace>>,
    /// Inverted-dropout multipliers on the pooled features (train mode only).
    pub mask: Option<Vec<f64>>,
    /// Dense-1 input: dropped pooled features followed by readability scores.
    pub fused: Vec<f64>,
    pub hidden_pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub logits: Logits,
}

#[derive(Debug, Clone)]
pub struct Book2VecCache {
    pub input: Vec<f64>,
    pub hidden_pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub logits: Logits,
}

#[derive(Debug, Clone)]
pub enum ForwardCache {
    Cnn(CnnCache),
    Book2Vec(Book2VecCache),
}

impl ForwardCache {
    pub fn logits(&self) -> Logits {
        match self {
            ForwardCache::Cnn(c) => c.logits,
            ForwardCache::Book2Vec(c) => c.logits,
        }
    }
}

/// Gradients of a scalar with respect to every parameter (shaped like the
/// model) and, for the CNN with readability fusion, the five scaled
/// readability inputs.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub params: Model,
    pub readability: Option<[f64; N_INDICES]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: SuccessLabel,
    pub p_successful: f64,
}

impl Prediction {
    pub fn from_logits(logits: Logits) -> Self {
        let p = softmax(logits);
        // Ties go to the majority class.
        let label = if logits[0] >= logits[1] {
            SuccessLabel::Successful
        } else {
            SuccessLabel::Unsuccessful
        };
        Prediction {
            label,
            p_successful: p[0],
        }
    }

    pub fn probability_of(&self, label: SuccessLabel) -> f64 {
        match label {
            SuccessLabel::Successful => self.p_successful,
            SuccessLabel::Unsuccessful => 1.0 - self.p_successful,
        }
    }
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

fn relu_backward(pre: &[f64], dy: &[f64]) -> Vec<f64> {
    pre.iter()
        .zip(dy)
        .map(|(&z, &g)| if z > 0.0 { g } else { 0.0 })
        .collect()
}

impl CnnModel {
    /// Glorot-uniform weights, zero biases.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = rng::derive(seed, rng::streams::INIT);
        let convs = config
            .window_sizes
            .iter()
            .map(|&w| ConvBank::glorot(w, config.filters_per_window, config.input_dim, &mut rng))
            .collect();
        let dense1 = Dense::glorot(config.fused_dim(), config.hidden_units, &mut rng);
        let dense2 = Dense::glorot(config.hidden_units, N_CLASSES, &mut rng);
        Ok(Self {
            config,
            convs,
            dense1,
            dense2,
        })
    }

    pub fn zeros(config: ModelConfig) -> Self {
        let convs = config
            .window_sizes
            .iter()
            .map(|&w| ConvBank::zeros(w, config.filters_per_window, config.input_dim))
            .collect();
        let dense1 = Dense::zeros(config.fused_dim(), config.hidden_units);
        let dense2 = Dense::zeros(config.hidden_units, N_CLASSES);
        Self {
            config,
            convs,
            dense1,
            dense2,
        }
    }

    /// Draws an inverted-dropout mask over the pooled features.
    pub fn dropout_mask<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let p = self.config.dropout_p;
        let keep = 1.0 / (1.0 - p);
        (0..self.config.pooled_dim())
            .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
            .collect()
    }

    fn check_input(
        &self,
        chunks: &ChunkSequence,
        readability: Option<&[f64; N_INDICES]>,
    ) -> Result<()> {
        let c = &self.config;
        if chunks.dim != c.input_dim || chunks.n_chunks != c.n_chunks {
            return Err(Error::Shape(format!(
                "model expects {}x{} chunks, got {}x{}",
                c.n_chunks, c.input_dim, chunks.n_chunks, chunks.dim
            )));
        }
        if chunks.values.len() != chunks.n_chunks * chunks.dim {
            return Err(Error::Shape(
                "chunk buffer length does not match its shape".into(),
            ));
        }
        match (c.use_readability, readability.is_some()) {
            (true, false) => Err(Error::Shape("model needs readability inputs".into())),
            (false, true) => Err(Error::Shape(
                "model was built without readability inputs".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Pooled convolution features, before dropout.
    pub fn pooled_features(&self, chunks: &ChunkSequence) -> Vec<PoolTrace> {
        self.convs
            .iter()
            .flat_map(|bank| bank.forward_pool(&chunks.values, chunks.n_chunks))
            .collect()
    }

    pub fn forward(
        &self,
        chunks: &ChunkSequence,
        readability: Option<&[f64; N_INDICES]>,
        mask: Option<&[f64]>,
    ) -> Result<CnnCache> {
        self.check_input(chunks, readability)?;
        let pools: Vec<Vec<PoolTrace>> = self
            .convs
            .iter()
            .map(|bank| bank.forward_pool(&chunks.values, chunks.n_chunks))
            .collect();
        let mut fused: Vec<f64> = pools.iter().flatten().map(|t| t.value).collect();
        if let Some(mask) = mask {
            if mask.len() != fused.len() {
                return Err(Error::Shape("dropout mask length".into()));
            }
            fused.iter_mut().zip(mask).for_each(|(x, m)| *x *= m);
        }
        if let Some(r) = readability {
            fused.extend_from_slice(r);
        }
        let hidden_pre = self.dense1.forward(&fused);
        let hidden = relu(&hidden_pre);
        let out = self.dense2.forward(&hidden);
        Ok(CnnCache {
            input: chunks.values.clone(),
            pools,
            mask: mask.map(<[f64]>::to_vec),
            fused,
            hidden_pre,
            hidden,
            logits: [out[0], out[1]],
        })
    }

    pub fn backward(
        &self,
        cache: &CnnCache,
        dlogits: Logits,
    ) -> (CnnModel, Option<[f64; N_INDICES]>) {
        let mut grad = CnnModel::zeros(self.config.clone());
        let dhidden = self
            .dense2
            .backward(&cache.hidden, &dlogits, &mut grad.dense2);
        let dpre = relu_backward(&cache.hidden_pre, &dhidden);
        let dfused = self.dense1.backward(&cache.fused, &dpre, &mut grad.dense1);

        let pooled = self.config.pooled_dim();
        let dreadability = self
            .config
            .use_readability
            .then(|| std::array::from_fn(|k| dfused[pooled + k]));
        let mut dpool = dfused[..pooled].to_vec();
        if let Some(mask) = &cache.mask {
            dpool.iter_mut().zip(mask).for_each(|(g, m)| *g *= m);
        }
        let per_bank = self.config.filters_per_window;
        for (b, bank) in self.convs.iter().enumerate() {
            bank.backward_pool(
                &cache.input,
                &cache.pools[b],
                &dpool[b * per_bank..(b + 1) * per_bank],
                &mut grad.convs[b],
            );
        }
        (grad, dreadability)
    }
}

impl Book2VecModel {
    pub fn init(input_dim: usize, hidden_units: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 || hidden_units == 0 {
            return Err(Error::Config(
                "Book2Vec input_dim and hidden_units must be positive".into(),
            ));
        }
        let mut rng = rng::derive(seed, rng::streams::INIT);
        let dense1 = Dense::glorot(input_dim, hidden_units, &mut rng);
        let dense2 = Dense::glorot(hidden_units, N_CLASSES, &mut rng);
        Ok(Self {
            input_dim,
            hidden_units,
            dense1,
            dense2,
        })
    }

    pub fn zeros(input_dim: usize, hidden_units: usize) -> Self {
        Self {
            input_dim,
            hidden_units,
            dense1: Dense::zeros(input_dim, hidden_units),
            dense2: Dense::zeros(hidden_units, N_CLASSES),
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Book2VecCache> {
        if x.len() != self.input_dim {
            return Err(Error::Shape(format!(
                "Book2Vec expects a {}-vector, got {}",
                self.input_dim,
                x.len()
            )));
        }
        let hidden_pre = self.dense1.forward(x);
        let hidden = relu(&hidden_pre);
        let out = self.dense2.forward(&hidden);
        Ok(Book2VecCache {
            input: x.to_vec(),
            hidden_pre,
            hidden,
            logits: [out[0], out[1]],
        })
    }

    pub fn backward(&self, cache: &Book2VecCache, dlogits: Logits) -> Book2VecModel {
        let mut grad = Book2VecModel::zeros(self.input_dim, self.hidden_units);
        let dhidden = self
            .dense2
            .backward(&cache.hidden, &dlogits, &mut grad.dense2);
        let dpre = relu_backward(&cache.hidden_pre, &dhidden);
        self.dense1.backward(&cache.input, &dpre, &mut grad.dense1);
        grad
    }
}

/// Either classifier, behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Cnn(CnnModel),
    Book2Vec(Book2VecModel),
}

impl Model {
    pub fn init_cnn(config: ModelConfig, seed: u64) -> Result<Self> {
        CnnModel::init(config, seed).map(Model::Cnn)
    }

    /// Two-layer feed-forward baseline over an averaged book vector.
    pub fn build_book2vec(input_dim: usize, hidden_units: usize, seed: u64) -> Result<Self> {
        Book2VecModel::init(input_dim, hidden_units, seed).map(Model::Book2Vec)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Cnn(_) => "cnn",
            Model::Book2Vec(_) => "book2vec",
        }
    }

    /// Width of one input row (chunk or book vector).
    pub fn input_dim(&self) -> usize {
        match self {
            Model::Cnn(m) => m.config.input_dim,
            Model::Book2Vec(m) => m.input_dim,
        }
    }

    pub fn uses_readability(&self) -> bool {
        matches!(self, Model::Cnn(m) if m.config.use_readability)
    }

    /// A model of the same shape with every parameter zero.
    pub fn zeros_like(&self) -> Model {
        match self {
            Model::Cnn(m) => Model::Cnn(CnnModel::zeros(m.config.clone())),
            Model::Book2Vec(m) => {
                Model::Book2Vec(Book2VecModel::zeros(m.input_dim, m.hidden_units))
            }
        }
    }

    /// Parameter tensors in fixed declaration order: per window size the
    /// kernel then bias, then dense-1 weight and bias, then dense-2.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        let (d1, d2) = match self {
            Model::Cnn(m) => {
                for c in &m.convs {
                    out.push(&c.kernel);
                    out.push(&c.bias);
                }
                (&m.dense1, &m.dense2)
            }
            Model::Book2Vec(m) => (&m.dense1, &m.dense2),
        };
        out.extend([&d1.weight[..], &d1.bias, &d2.weight, &d2.bias]);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        let (d1, d2) = match self {
            Model::Cnn(m) => {
                for c in &mut m.convs {
                    out.push(&mut c.kernel);
                    out.push(&mut c.bias);
                }
                (&mut m.dense1, &mut m.dense2)
            }
            Model::Book2Vec(m) => (&mut m.dense1, &mut m.dense2),
        };
        out.push(&mut d1.weight);
        out.push(&mut d1.bias);
        out.push(&mut d2.weight);
        out.push(&mut d2.bias);
        out
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// `self += alpha * other`, tensor by tensor.
    pub fn add_scaled(&mut self, alpha: f64, other: &Model) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            super::layers::axpy(alpha, src, dst);
        }
    }

    /// Rounds every parameter to the nearest `f32`, the precision checkpoints
    /// store.
    pub fn round_to_f32(&mut self) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x = f64::from(*x as f32));
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|x| x.is_finite()))
    }

    pub fn dropout_mask<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<f64>> {
        match self {
            Model::Cnn(m) => Some(m.dropout_mask(rng)),
            Model::Book2Vec(_) => None,
        }
    }

    /// Forward pass that always records a cache. `mask` applies dropout
    /// (training); `None` is inference.
    pub fn forward_with_mask(
        &self,
        input: Input<'_>,
        mask: Option<&[f64]>,
    ) -> Result<ForwardCache> {
        match (self, input) {
            (
                Model::Cnn(m),
                Input::Chunks {
                    chunks,
                    readability,
                },
            ) => m.forward(chunks, readability, mask).map(ForwardCache::Cnn),
            (Model::Book2Vec(m), Input::Vector(v)) => m.forward(v).map(ForwardCache::Book2Vec),
            (Model::Cnn(_), Input::Vector(_)) => {
                Err(Error::Shape("CNN needs a chunk sequence input".into()))
            }
            (Model::Book2Vec(_), Input::Chunks { .. }) => Err(Error::Shape(
                "Book2Vec needs an averaged book vector".into(),
            )),
        }
    }

    /// Forward pass. With a generator, runs in training mode: a fresh dropout
    /// mask is drawn and the cache is returned for backprop. Without one,
    /// runs in inference mode and returns no cache.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        input: Input<'_>,
        train_rng: Option<&mut R>,
    ) -> Result<(Logits, Option<ForwardCache>)> {
        match train_rng {
            Some(rng) => {
                let mask = self.dropout_mask(rng);
                let cache = self.forward_with_mask(input, mask.as_deref())?;
                Ok((cache.logits(), Some(cache)))
            }
            None => Ok((self.forward_with_mask(input, None)?.logits(), None)),
        }
    }

    pub fn logits(&self, input: Input<'_>) -> Result<Logits> {
        Ok(self.forward_with_mask(input, None)?.logits())
    }

    /// Back-propagates `dlogits` through the pass recorded in `cache`, which
    /// must come from this model with unchanged parameters.
    pub fn backward(&self, cache: &ForwardCache, dlogits: Logits) -> Gradients {
        match (self, cache) {
            (Model::Cnn(m), ForwardCache::Cnn(c)) => {
                let (g, r) = m.backward(c, dlogits);
                Gradients {
                    params: Model::Cnn(g),
                    readability: r,
                }
            }
            (Model::Book2Vec(m), ForwardCache::Book2Vec(c)) => Gradients {
                params: Model::Book2Vec(m.backward(c, dlogits)),
                readability: None,
            },
            _ => panic!("forward cache does not belong to this model kind"),
        }
    }

    pub fn predict(&self, input: Input<'_>) -> Result<Prediction> {
        Ok(Prediction::from_logits(self.logits(input)?))
    }
}
