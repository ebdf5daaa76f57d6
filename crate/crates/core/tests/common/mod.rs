//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use booksuccess::neuralnet::{loss, loss_and_grad, ForwardCache, Input, Model, ModelConfig};
use booksuccess::{ChunkSequence, SuccessLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_EPS: f64 = 1e-4;

/// Relative error with a small absolute floor so that gradients that are
/// zero on both sides compare equal.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

#[derive(Debug, Default, Clone)]
pub struct GradReport {
    pub max_rel: f64,
    pub checked: usize,
    /// Coordinates skipped because the perturbation crossed a ReLU or
    /// max-pooling switch point, where the loss is not differentiable.
    pub kinks: usize,
    pub worst: String,
}

impl GradReport {
    fn record(&mut self, rel: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        if rel > self.max_rel {
            self.max_rel = rel;
            self.worst = what();
        }
    }

    pub fn merge(&mut self, other: GradReport) {
        self.checked += other.checked;
        self.kinks += other.kinks;
        if other.max_rel > self.max_rel {
            self.max_rel = other.max_rel;
            self.worst = other.worst;
        }
    }
}

/// Which side of every non-differentiable switch a forward pass landed on.
fn activation_pattern(cache: &ForwardCache) -> Vec<i64> {
    match cache {
        ForwardCache::Cnn(c) => {
            let mut p = Vec::new();
            for bank in &c.pools {
                for t in bank {
                    p.push(t.argmax as i64);
                    p.push(i64::from(t.value > 0.0));
                }
            }
            p.extend(c.hidden_pre.iter().map(|&z| i64::from(z > 0.0)));
            p
        }
        ForwardCache::Book2Vec(c) => c.hidden_pre.iter().map(|&z| i64::from(z > 0.0)).collect(),
    }
}

struct Case<'a> {
    chunks: Option<&'a ChunkSequence>,
    vector: Option<&'a [f64]>,
    mask: Option<&'a [f64]>,
    label: SuccessLabel,
}

impl Case<'_> {
    fn forward(&self, model: &Model, readability: Option<&[f64; 5]>) -> ForwardCache {
        let input = match (self.chunks, self.vector) {
            (Some(chunks), _) => Input::Chunks {
                chunks,
                readability,
            },
            (None, Some(v)) => Input::Vector(v),
            _ => unreachable!(),
        };
        model.forward_with_mask(input, self.mask).expect("forward")
    }
}

fn check_case(
    model: &Model,
    case: &Case<'_>,
    readability: Option<[f64; 5]>,
    tag: &str,
) -> GradReport {
    let mut report = GradReport::default();
    let cache = case.forward(model, readability.as_ref());
    let (_, dlogits) = loss_and_grad(cache.logits(), case.label);
    let grads = model.backward(&cache, dlogits);

    let analytic: Vec<Vec<f64>> = grads.params.tensors().iter().map(|t| t.to_vec()).collect();
    let n_tensors = analytic.len();
    for (ti, tensor) in analytic.iter().enumerate() {
        for (j, &a) in tensor.iter().enumerate() {
            let mut plus = model.clone();
            plus.tensors_mut()[ti][j] += FD_EPS;
            let mut minus = model.clone();
            minus.tensors_mut()[ti][j] -= FD_EPS;
            let cp = case.forward(&plus, readability.as_ref());
            let cm = case.forward(&minus, readability.as_ref());
            let base = activation_pattern(&cache);
            if activation_pattern(&cp) != base || activation_pattern(&cm) != base {
                report.kinks += 1;
                continue;
            }
            let num =
                (loss(cp.logits(), case.label) - loss(cm.logits(), case.label)) / (2.0 * FD_EPS);
            report.record(rel_err(a, num), || {
                format!("{tag} tensor {ti}/{n_tensors} elem {j}: analytic {a} numeric {num}")
            });
        }
    }

    if let Some(r) = readability {
        let a = grads.readability.expect("readability gradient");
        for i in 0..5 {
            let mut up = r;
            up[i] += FD_EPS;
            let mut down = r;
            down[i] -= FD_EPS;
            let cp = case.forward(model, Some(&up));
            let cm = case.forward(model, Some(&down));
            let base = activation_pattern(&cache);
            if activation_pattern(&cp) != base || activation_pattern(&cm) != base {
                report.kinks += 1;
                continue;
            }
            let num =
                (loss(cp.logits(), case.label) - loss(cm.logits(), case.label)) / (2.0 * FD_EPS);
            report.record(rel_err(a[i], num), || {
                format!("{tag} readability {i}: analytic {} numeric {num}", a[i])
            });
        }
    }
    report
}

fn random_label(rng: &mut ChaCha8Rng) -> SuccessLabel {
    SuccessLabel::from_class_index(rng.random_range(0..2))
}

/// A random small CNN configuration: dim <= 8, n_chunks <= 10.
pub fn random_cnn_config(rng: &mut ChaCha8Rng) -> ModelConfig {
    let n_chunks = rng.random_range(1..=10);
    let n_windows = rng.random_range(1..=3);
    let mut window_sizes: Vec<usize> = (0..n_windows)
        .map(|_| rng.random_range(1..=n_chunks.min(7)))
        .collect();
    window_sizes.sort_unstable();
    window_sizes.dedup();
    ModelConfig {
        window_sizes,
        filters_per_window: rng.random_range(1..=4),
        hidden_units: rng.random_range(2..=8),
        dropout_p: [0.0, 0.3, 0.6][rng.random_range(0..3)],
        input_dim: rng.random_range(1..=8),
        n_chunks,
        use_readability: rng.random::<f64>() < 0.75,
    }
}

/// Central-difference check of every CNN parameter and the readability
/// inputs on `n_configs` random configurations, in training mode with a
/// replayed dropout mask.
pub fn cnn_gradient_check(n_configs: usize, seed: u64) -> GradReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = GradReport::default();
    for k in 0..n_configs {
        let cfg = random_cnn_config(&mut rng);
        let model = Model::init_cnn(cfg.clone(), rng.random()).expect("config");
        // Perturb biases away from zero so they are exercised too.
        let mut model = model;
        for t in model.tensors_mut() {
            for x in t.iter_mut() {
                *x += rng.random_range(-0.1..0.1);
            }
        }
        let values = (0..cfg.n_chunks * cfg.input_dim)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let chunks = ChunkSequence {
            n_chunks: cfg.n_chunks,
            dim: cfg.input_dim,
            values,
        };
        let mask = model.dropout_mask(&mut rng);
        let readability = cfg
            .use_readability
            .then(|| std::array::from_fn(|_| rng.random_range(-2.0..2.0)));
        let case = Case {
            chunks: Some(&chunks),
            vector: None,
            mask: mask.as_deref(),
            label: random_label(&mut rng),
        };
        total.merge(check_case(
            &model,
            &case,
            readability,
            &format!("cnn config {k} {cfg:?}"),
        ));
    }
    total
}

pub fn book2vec_gradient_check(n_configs: usize, seed: u64) -> GradReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = GradReport::default();
    for k in 0..n_configs {
        let dim = rng.random_range(1..=8);
        let hidden = rng.random_range(1..=8);
        let mut model = Model::build_book2vec(dim, hidden, rng.random()).expect("config");
        for t in model.tensors_mut() {
            for x in t.iter_mut() {
                *x += rng.random_range(-0.1..0.1);
            }
        }
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let case = Case {
            chunks: None,
            vector: Some(&v),
            mask: None,
            label: random_label(&mut rng),
        };
        total.merge(check_case(
            &model,
            &case,
            None,
            &format!("book2vec config {k}"),
        ));
    }
    total
}
