use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use fcaclust::eval::{precision_at_k, synth_corpus};
use fcaclust::pipeline::{cluster_query, rank_query, search, RankMode};
use fcaclust::ranker::{flatten, rank_clusters_ca, rank_clusters_oracle};
use fcaclust::text::Index;
use fcaclust::{
    Automaton, DocSet, Document, FcaConfig, FuzzyState, Partition, Qrels, RuleVector, SynthSpec, TerminalKind,
};

const CODES: [u32; 16] = [0, 170, 204, 238, 240, 250, 252, 254, 255, 85, 51, 17, 15, 5, 3, 1];

fn unit_vectors(dim: usize, max_docs: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0f64..1.0, dim), 1..=max_docs).prop_map(|vs| {
        vs.into_iter()
            .map(|mut v| {
                if v.iter().all(|&x| x < 1e-3) {
                    v[0] = 1.0;
                }
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter_mut().for_each(|x| *x /= n);
                v
            })
            .collect()
    })
}

fn docset(vs: &[Vec<f64>]) -> Arc<DocSet> {
    Arc::new(
        DocSet::from_dense(
            vs.iter()
                .enumerate()
                .map(|(i, v)| (format!("d{i:03}"), v.clone()))
                .collect(),
        )
        .unwrap(),
    )
}

fn corpus_text() -> impl Strategy<Value = Vec<String>> {
    let word = prop::sample::select(vec![
        "alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta", "iota",
    ]);
    prop::collection::vec(prop::collection::vec(word, 0..12).prop_map(|w| w.join(" ")), 1..15)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trajectory_terminal_states(codes in prop::collection::vec(prop::sample::select(CODES.to_vec()), 1..8),
                                  seed in prop::collection::vec(0.0f64..=1.0, 8)) {
        let n = codes.len();
        let ca = Automaton::new(RuleVector::from_codes(&codes).unwrap());
        let p0 = FuzzyState::new(seed[..n].to_vec()).unwrap();
        let t = ca.evolve(&p0, 200).unwrap();
        for s in &t.states {
            prop_assert!(s.cells().iter().all(|x| (0.0..=1.0).contains(x)));
        }
        let last = t.states.last().unwrap();
        match t.terminal_kind {
            TerminalKind::FixedPoint => {
                prop_assert_eq!(&ca.step(last).unwrap(), last);
                prop_assert_eq!(&t.attractor, last);
            }
            TerminalKind::Cycle => {
                let first = t.states.iter().position(|s| s == last).unwrap();
                prop_assert!(first < t.states.len() - 2);
                prop_assert_eq!(&t.attractor, &t.states[first]);
            }
            TerminalKind::StepCap => prop_assert_eq!(t.states.len(), 201),
        }
    }

    #[test]
    fn matrix_rows_follow_rules(codes in prop::collection::vec(prop::sample::select(CODES.to_vec()), 1..20)) {
        let ca = Automaton::new(RuleVector::from_codes(&codes).unwrap());
        let n = codes.len();
        for (i, rule) in ca.rules().rules().iter().enumerate() {
            let row = ca.matrix().row(i);
            prop_assert!(row.iter().filter(|&&x| x == 1).count() <= 3);
            for (j, &x) in row.iter().enumerate() {
                let want = (j + 1 == i && rule.depends_left())
                    || (j == i && rule.depends_self())
                    || (j == i + 1 && rule.depends_right());
                prop_assert_eq!(x == 1, want, "row {} col {} of {}", i, j, n);
            }
            prop_assert_eq!(ca.mask().as_slice()[i], rule.complemented());
        }
    }

    #[test]
    fn partition_invariants_under_moves(vs in unit_vectors(6, 25), k in 1usize..5, seed in any::<u64>(),
                                        moves in prop::collection::vec((any::<prop::sample::Index>(), 0usize..5), 0..60)) {
        let docs = docset(&vs);
        let mut p = Partition::init(docs.clone(), k, seed).unwrap();
        for (doc, target) in moves {
            let d = doc.index(vs.len());
            let id = docs.get(d).doc_id.clone();
            let src = p.assignment()[d];
            let target = target % k;
            if target != src {
                let want = p.delta_remove(src, &id).unwrap() + p.delta_add(target, &id).unwrap();
                let before = p.energy();
                p.apply_move(&id, target).unwrap();
                prop_assert!((p.energy() - before - want).abs() <= 1e-9);
            }
        }
        prop_assert!(p.is_consistent());
        let mut seen = BTreeSet::new();
        for i in 0..k {
            let c = p.cluster(i);
            prop_assert!(c.norm() <= c.len() as f64 + 1e-9);
            prop_assert_eq!(c.norm() == 0.0, c.is_empty());
            for &m in c.members() {
                prop_assert!(seen.insert(m));
                prop_assert_eq!(p.assignment()[m], i);
            }
        }
        prop_assert_eq!(seen.len(), vs.len());
        prop_assert!(p.composite_drift() <= 1e-7);
        prop_assert!((p.energy() - p.exact_energy()).abs() <= 1e-7);
        prop_assert!(p.energy() <= vs.len() as f64 + 1e-9);
    }

    #[test]
    fn best_move_delta_is_sum_of_parts(vs in unit_vectors(4, 12), k in 2usize..4, seed in any::<u64>()) {
        let p = Partition::init(docset(&vs), k, seed).unwrap();
        if let Some(mv) = p.best_move() {
            let want = p.delta_remove(mv.source, &mv.doc_id).unwrap() + p.delta_add(mv.target, &mv.doc_id).unwrap();
            prop_assert!((mv.delta - want).abs() <= 1e-9);
            prop_assert_ne!(mv.source, mv.target);
        }
    }

    #[test]
    fn orderings_and_flatten(vs in unit_vectors(5, 20), k in 1usize..5, seed in any::<u64>(),
                             query in prop::collection::vec(0.0f64..1.0, 5),
                             rel in prop::collection::vec(any::<bool>(), 20)) {
        let docs = docset(&vs);
        let mut p = Partition::init(docs.clone(), k, seed).unwrap();
        let cap = p.default_max_iters();
        p.lsc(cap);
        let nonempty: BTreeSet<usize> = (0..k).filter(|&i| !p.cluster(i).is_empty()).collect();

        let mut qrels = Qrels::new();
        for (i, &r) in rel.iter().enumerate().take(vs.len()) {
            qrels.insert("q", &format!("d{i:03}"), r).unwrap();
        }
        let lq = rank_clusters_oracle(&p, &qrels, "q").unwrap();
        prop_assert_eq!(lq.order.iter().copied().collect::<BTreeSet<_>>(), nonempty.clone());
        prop_assert!(lq.scores.windows(2).all(|w| w[0] >= w[1]));

        let lc = rank_clusters_ca(&p, "q", &query, &FcaConfig::default()).unwrap();
        prop_assert_eq!(lc.order.iter().copied().collect::<BTreeSet<_>>(), nonempty);
        prop_assert!(lc.scores.windows(2).all(|w| w[0] <= w[1]));

        let sparse = fcaclust::SparseVector::from_dense(&query).normalized();
        for ordering in [&lq, &lc] {
            let run = flatten(ordering, &p, &sparse, &[]).unwrap();
            let ids: Vec<&str> = run.doc_ids().collect();
            let unique: BTreeSet<&str> = ids.iter().copied().collect();
            prop_assert_eq!(ids.len(), vs.len());
            prop_assert_eq!(unique.len(), vs.len());
            prop_assert!(run.entries.iter().enumerate().all(|(i, e)| e.rank == i + 1));
            prop_assert!(run.entries.windows(2).all(|w| w[0].score >= w[1].score));
        }
    }

    #[test]
    fn relevant_cluster_leads(vs in unit_vectors(4, 16), split in 1usize..16) {
        // cluster 0 holds exactly the relevant documents
        let n = vs.len();
        prop_assume!(split < n);
        let ids: Vec<String> = (0..n).map(|i| format!("d{i:03}")).collect();
        let groups = vec![ids[..split].iter().map(String::as_str).collect::<Vec<_>>(),
                          ids[split..].iter().map(String::as_str).collect()];
        let p = Partition::from_groups(docset(&vs), &groups).unwrap();
        let mut qrels = Qrels::new();
        for (i, id) in ids.iter().enumerate() {
            qrels.insert("q", id, i < split).unwrap();
        }
        let lq = rank_clusters_oracle(&p, &qrels, "q").unwrap();
        prop_assert_eq!(lq.order[0], 0);
        let run = flatten(&lq, &p, &fcaclust::SparseVector::from_dense(&vs[0]), &[]).unwrap();
        for k in 1..=split {
            prop_assert_eq!(precision_at_k(&run, &qrels, k).unwrap(), 1.0);
        }
    }

    #[test]
    fn index_vectors_are_unit_and_reproducible(texts in corpus_text()) {
        let docs: Vec<Document> = texts.iter().enumerate().map(|(i, t)| Document::new(format!("doc{i}"), t.clone())).collect();
        let a = Index::build(&docs).unwrap();
        let b = Index::build(&docs).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        let vocab = a.vocabulary().len() as u32;
        for (id, e) in a.vocabulary().entries().iter().enumerate() {
            prop_assert_eq!(e.id as usize, id);
            prop_assert!(e.df >= 1);
        }
        for d in a.documents() {
            let v = &d.weights;
            prop_assert_eq!(d.zero, v.is_zero());
            prop_assert!(v.entries().iter().all(|&(t, w)| t < vocab && w >= 0.0));
            if !d.zero {
                prop_assert!((v.norm() - 1.0).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn index_file_round_trip_is_exact() {
    let corpus = synth_corpus(&SynthSpec {
        docs_per_topic: 20,
        ..SynthSpec::default()
    })
    .unwrap();
    let index = Index::build(&corpus.documents).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("index.json");
    index.save(&path).unwrap();
    let loaded = Index::load(&path).unwrap();
    assert_eq!(loaded.to_json(), index.to_json());
    for (a, b) in index.documents().iter().zip(loaded.documents()) {
        let bits = |v: &fcaclust::SparseVector| v.entries().iter().map(|&(t, w)| (t, w.to_bits())).collect::<Vec<_>>();
        assert_eq!(bits(&a.weights), bits(&b.weights));
    }
}

#[test]
fn pipeline_is_deterministic_and_seeded() {
    let corpus = synth_corpus(&SynthSpec {
        seed: 4,
        ..SynthSpec::default()
    })
    .unwrap();
    let index = Index::build(&corpus.documents).unwrap();
    let queries: Vec<_> = corpus
        .queries
        .iter()
        .map(|(id, t)| index.query(id.clone(), t.clone()))
        .collect();
    let base = search(&index, &queries, 200);
    assert_eq!(base.to_trec(), search(&index, &queries, 200).to_trec());
    for q in &queries {
        let run = base.get(&q.query_id).unwrap();
        let a = cluster_query(&index, run, 4, 9, None).unwrap();
        let b = cluster_query(&index, run, 4, 9, None).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let one = cluster_query(&index, run, 1, 9, None).unwrap();
        assert_eq!(one.clusters.len(), 1);
        assert_eq!(one.iterations, 0);
        for mode in [RankMode::Lq, RankMode::Lc] {
            let x = rank_query(&index, &a, q, mode, Some(&corpus.qrels), &FcaConfig::default()).unwrap();
            let y = rank_query(&index, &b, q, mode, Some(&corpus.qrels), &FcaConfig::default()).unwrap();
            assert_eq!(x, y);
            assert_eq!(x.len(), run.len());
        }
    }
}
