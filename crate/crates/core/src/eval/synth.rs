use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Qrels;
use crate::text::Document;

/// Parameters of a planted-topic test collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub topics: usize,
    pub docs_per_topic: usize,
    pub vocab_size: usize,
    /// Zipf exponent of term weights inside a topic pool.
    pub concentration: f64,
    /// Probability that a token is drawn uniformly from the whole vocabulary
    /// instead of the document's topic pool.
    pub noise: f64,
    /// Mean document length in tokens; lengths are uniform in
    /// `[doc_len / 2, 3 * doc_len / 2]`.
    pub doc_len: usize,
    /// Number of top-weighted pool terms forming each query.
    pub query_len: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            topics: 4,
            docs_per_topic: 50,
            vocab_size: 6000,
            concentration: 0.7,
            noise: 0.2,
            doc_len: 12,
            query_len: 3,
            seed: 1,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("topics", self.topics),
            ("docs_per_topic", self.docs_per_topic),
            ("vocab_size", self.vocab_size),
            ("doc_len", self.doc_len),
            ("query_len", self.query_len),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InfeasibleSpec(format!("{name} must be positive")));
        }
        if self.vocab_size < self.topics {
            return Err(Error::InfeasibleSpec(format!(
                "vocabulary of {} terms cannot hold {} disjoint topic pools",
                self.vocab_size, self.topics
            )));
        }
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(Error::InfeasibleSpec("concentration must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return Err(Error::InfeasibleSpec("noise must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    /// Sorted by doc id.
    pub documents: Vec<Document>,
    /// `(query_id, text)`, one per topic.
    pub queries: Vec<(String, String)>,
    pub qrels: Qrels,
    /// Generating topic of each document, parallel to `documents`.
    pub topic_of: Vec<usize>,
}

impl SynthCorpus {
    pub fn corpus_tsv(&self) -> String {
        self.documents
            .iter()
            .map(|d| format!("{}\t{}\n", d.doc_id, d.text))
            .collect()
    }

    pub fn queries_tsv(&self) -> String {
        self.queries.iter().map(|(id, t)| format!("{id}\t{t}\n")).collect()
    }
}

fn term_name(id: usize) -> String {
    format!("w{id:05}")
}

/// Generates documents, one query per topic and binary qrels (a document
/// is relevant to a query iff it was generated from that query's topic).
pub fn synth_corpus(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // disjoint pools: shuffled vocabulary dealt into contiguous chunks
    let mut terms: Vec<usize> = (0..spec.vocab_size).collect();
    terms.shuffle(&mut rng);
    let base = spec.vocab_size / spec.topics;
    let extra = spec.vocab_size % spec.topics;
    let mut pools = Vec::with_capacity(spec.topics);
    let mut start = 0;
    for t in 0..spec.topics {
        let len = base + usize::from(t < extra);
        pools.push(terms[start..start + len].to_vec());
        start += len;
    }
    let samplers: Vec<WeightedIndex<f64>> = pools
        .iter()
        .map(|pool| {
            let weights = (0..pool.len()).map(|r| 1.0 / ((r + 1) as f64).powf(spec.concentration));
            WeightedIndex::new(weights).expect("pool weights are positive")
        })
        .collect();

    let total = spec.topics * spec.docs_per_topic;
    let mut slots: Vec<usize> = (0..total).collect();
    slots.shuffle(&mut rng);
    let width = total.to_string().len().max(4);

    let mut docs: Vec<(String, String, usize)> = Vec::with_capacity(total);
    for (n, &slot) in slots.iter().enumerate() {
        let topic = n / spec.docs_per_topic;
        let lo = (spec.doc_len / 2).max(1);
        let hi = (spec.doc_len * 3 / 2).max(lo);
        let len = rng.gen_range(lo..=hi);
        let words: Vec<String> = (0..len)
            .map(|_| {
                let id = if rng.gen::<f64>() < spec.noise {
                    rng.gen_range(0..spec.vocab_size)
                } else {
                    pools[topic][samplers[topic].sample(&mut rng)]
                };
                term_name(id)
            })
            .collect();
        docs.push((format!("doc{slot:0width$}"), words.join(" "), topic));
    }
    docs.sort_by(|a, b| a.0.cmp(&b.0));

    let qwidth = spec.topics.to_string().len().max(2);
    let queries: Vec<(String, String)> = pools
        .iter()
        .enumerate()
        .map(|(t, pool)| {
            let text: Vec<String> = pool.iter().take(spec.query_len).map(|&id| term_name(id)).collect();
            (format!("q{:0qwidth$}", t + 1), text.join(" "))
        })
        .collect();

    let mut qrels = Qrels::new();
    for (id, _, topic) in &docs {
        qrels.insert(&queries[*topic].0, id, true)?;
    }

    Ok(SynthCorpus {
        topic_of: docs.iter().map(|d| d.2).collect(),
        documents: docs.into_iter().map(|(id, text, _)| Document::new(id, text)).collect(),
        queries,
        qrels,
    })
}
