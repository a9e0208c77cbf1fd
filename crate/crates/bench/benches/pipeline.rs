use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fcaclust::eval::synth_corpus;
use fcaclust::{Automaton, DocSet, FuzzyState, Index, Partition, RuleVector, SynthSpec};

fn unit_docs(n: usize, dim: usize, seed: u64) -> Arc<DocSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs = (0..n)
        .map(|i| {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            (format!("d{i:04}"), v.into_iter().map(|x| x / norm).collect())
        })
        .collect();
    Arc::new(DocSet::from_dense(docs).unwrap())
}

fn clustering(c: &mut Criterion) {
    let docs = unit_docs(200, 64, 7);
    let start = Partition::init(docs, 8, 1).unwrap();
    c.bench_function("tcls_step/200x64/k8", |b| {
        b.iter_batched(
            || start.clone(),
            |mut p| black_box(p.tcls_step()),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("lsc/200x64/k8", |b| {
        b.iter_batched(
            || start.clone(),
            |mut p| {
                let cap = p.default_max_iters();
                black_box(p.lsc(cap))
            },
            BatchSize::SmallInput,
        )
    });
}

fn automaton(c: &mut Criterion) {
    let rules: RuleVector = "238,254,238,252".parse().unwrap();
    let ca = Automaton::new(rules.cyclic(64).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = FuzzyState::new((0..64).map(|_| rng.gen::<f64>()).collect()).unwrap();
    c.bench_function("fca_step/64", |b| b.iter(|| black_box(ca.step(&p).unwrap())));
    c.bench_function("fca_evolve/64", |b| b.iter(|| black_box(ca.evolve(&p, 64).unwrap())));
}

fn retrieval(c: &mut Criterion) {
    let corpus = synth_corpus(&SynthSpec {
        docs_per_topic: 500,
        ..SynthSpec::default()
    })
    .unwrap();
    let index = Index::build(&corpus.documents).unwrap();
    let (id, text) = &corpus.queries[0];
    let q = index.query(id.clone(), text.clone());
    c.bench_function("retrieve_top_k/2000/depth1000", |b| {
        b.iter(|| black_box(index.retrieve_top_k(&q, 1000)))
    });
}

criterion_group!(benches, clustering, automaton, retrieval);
criterion_main!(benches);
