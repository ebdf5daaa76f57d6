use std::hint::black_box;

use booksuccess::embedding::ChunkSequence;
use booksuccess::neuralnet::{loss_and_grad, Input, Model, ModelConfig};
use booksuccess::pipeline::{featurize_corpus, prepare_samples, Trainer};
use booksuccess::readability::fit_scaler;
use booksuccess::synthetic::{planted_corpus, PlantedConfig};
use booksuccess::{AdamConfig, SuccessLabel, TrainConfig};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cnn_pass(c: &mut Criterion) {
    let config = ModelConfig::default();
    let model = Model::init_cnn(config.clone(), 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let chunks = ChunkSequence {
        n_chunks: config.n_chunks,
        dim: config.input_dim,
        values: (0..config.n_chunks * config.input_dim)
            .map(|_| rng.random_range(-0.1..0.1))
            .collect(),
    };
    let readability = [0.3, -1.2, 0.8, 0.0, 1.5];
    let input = Input::Chunks {
        chunks: &chunks,
        readability: Some(&readability),
    };

    c.bench_function("cnn_forward_inference", |b| {
        b.iter(|| model.logits(black_box(input)).unwrap())
    });
    c.bench_function("cnn_forward_backward", |b| {
        b.iter(|| {
            let (logits, cache) = model.forward(black_box(input), Some(&mut rng)).unwrap();
            let (_, dlogits) = loss_and_grad(logits, SuccessLabel::Successful);
            model.backward(&cache.unwrap(), dlogits)
        })
    });
}

fn training_epoch(c: &mut Criterion) {
    let dir = std::env::temp_dir().join(format!("booksuccess-bench-model-{}", std::process::id()));
    let corpus = planted_corpus(
        &dir,
        &PlantedConfig {
            n_books: 64,
            ..PlantedConfig::default()
        },
    )
    .expect("synthetic corpus");
    let cfg = TrainConfig::default();
    let feats = featurize_corpus(&corpus.train, &cfg.features)
        .into_iter()
        .collect::<booksuccess::Result<Vec<_>>>()
        .unwrap();
    let _ = std::fs::remove_dir_all(&dir);
    let readability: Vec<_> = feats.iter().map(|f| f.readability).collect();
    let samples = prepare_samples(feats, &fit_scaler(&readability).unwrap());
    let model = Model::init_cnn(
        ModelConfig {
            input_dim: samples[0].features.chunks.dim,
            ..ModelConfig::default()
        },
        0,
    )
    .unwrap();

    let mut g = c.benchmark_group("training");
    g.sample_size(10);
    g.bench_function(format!("epoch_{}_books", samples.len()), |b| {
        b.iter_batched(
            || Trainer::new(model.clone(), AdamConfig::default(), cfg.batch_size, 0),
            |mut t| t.run_epoch(black_box(&samples)).unwrap(),
            BatchSize::LargeInput,
        )
    });
    g.finish();
}

criterion_group!(benches, cnn_pass, training_epoch);
criterion_main!(benches);
