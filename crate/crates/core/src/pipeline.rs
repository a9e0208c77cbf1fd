//! Per-query stages of the retrieve → cluster → rank → evaluate pipeline.
//!
//! Each function handles a single query and is pure, so callers can fan
//! queries out over threads and still get identical output.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use crate::cluster::{ClusterDoc, DocSet, Partition, PartitionRecord};
use crate::error::{Error, Result};
use crate::eval::{synth_corpus, PrecisionReport, Qrels, SynthSpec};
use crate::ranker::{flatten, rank_clusters_ca, rank_clusters_centroid, rank_clusters_oracle, FcaConfig};
use crate::run::{RankedRun, RunSet};
use crate::text::{DocumentVector, Index, Query};
use crate::vector::SparseVector;

/// Upper bound on spherical K-Means passes run for the energy comparison.
const KMEANS_MAX_PASSES: usize = 100;

/// Dense coordinate system over the terms used by a candidate set.
#[derive(Debug, Clone)]
pub struct LocalSpace {
    /// Global term id of each local dimension, ascending.
    terms: Vec<u32>,
}

impl LocalSpace {
    pub fn new<'a>(docs: impl IntoIterator<Item = &'a SparseVector>) -> Self {
        let mut terms: Vec<u32> = docs.into_iter().flat_map(|v| v.entries().iter().map(|e| e.0)).collect();
        terms.sort_unstable();
        terms.dedup();
        LocalSpace { terms }
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    /// Re-expresses `v` in local coordinates, dropping terms outside the
    /// space.
    pub fn project(&self, v: &SparseVector) -> SparseVector {
        v.remap(|t| self.terms.binary_search(&t).ok().map(|i| i as u32))
    }
}

fn lookup<'a>(index: &'a Index, doc_id: &str) -> Result<&'a DocumentVector> {
    index
        .document(doc_id)
        .ok_or_else(|| Error::InvalidArgument(format!("document {doc_id:?} is not in the index")))
}

/// Clusterable documents (nonzero vectors) in a local space.
fn candidate_docs<'a>(
    index: &Index,
    ids: impl IntoIterator<Item = &'a str>,
) -> Result<Option<(Arc<DocSet>, LocalSpace)>> {
    let vectors = ids
        .into_iter()
        .map(|id| lookup(index, id))
        .collect::<Result<Vec<_>>>()?;
    let vectors: Vec<&DocumentVector> = vectors.into_iter().filter(|d| !d.zero).collect();
    if vectors.is_empty() {
        return Ok(None);
    }
    let space = LocalSpace::new(vectors.iter().map(|d| &d.weights));
    let docs = vectors
        .iter()
        .map(|d| ClusterDoc::new(d.doc_id.clone(), space.project(&d.weights)))
        .collect();
    Ok(Some((Arc::new(DocSet::new(docs, space.dim())?), space)))
}

/// Baseline retrieval for every query, in query order.
pub fn search(index: &Index, queries: &[Query], depth: usize) -> RunSet {
    RunSet::new("baseline", queries.iter().map(|q| index.retrieve_top_k(q, depth)))
}

/// Clusters one query's retrieved set with seeded local search.
///
/// Zero-vector candidates cannot be clustered and are listed as
/// `unclustered`. The record also carries the energy spherical K-Means
/// reaches from the same initial partition.
pub fn cluster_query(
    index: &Index,
    run: &RankedRun,
    k: usize,
    seed: u64,
    max_iters: Option<usize>,
) -> Result<PartitionRecord> {
    if k < 1 {
        return Err(Error::InvalidArgument("cluster count K must be at least 1".into()));
    }
    let mut unclustered = Vec::new();
    for id in run.doc_ids() {
        if lookup(index, id)?.zero {
            unclustered.push(id.to_string());
        }
    }
    unclustered.sort();

    let Some((docs, _)) = candidate_docs(index, run.doc_ids())? else {
        return Ok(PartitionRecord {
            query_id: run.query_id.clone(),
            k,
            energy: 0.0,
            iterations: 0,
            converged: true,
            energy_trace: vec![0.0],
            kmeans_energy: None,
            clusters: (0..k).map(|i| (i, Vec::new())).collect(),
            unclustered,
        });
    };
    let mut partition = Partition::init(docs, k, seed)?;
    let mut kmeans = partition.clone();
    kmeans.kmeans(KMEANS_MAX_PASSES);

    let cap = max_iters.unwrap_or_else(|| partition.default_max_iters());
    let outcome = partition.lsc(cap);
    let mut record = partition.to_record(&run.query_id, Some(&outcome));
    record.kmeans_energy = Some(kmeans.energy());
    record.unclustered = unclustered;
    Ok(record)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMode {
    /// Clusters by relevant-member count (needs qrels).
    Lq,
    /// Clusters by CA attractor distance to the query.
    Lc,
    /// The unclustered retrieval run, unchanged.
    Baseline,
}

impl RankMode {
    pub fn tag(&self) -> &'static str {
        match self {
            RankMode::Lq => "lq",
            RankMode::Lc => "lc",
            RankMode::Baseline => "baseline",
        }
    }
}

impl FromStr for RankMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lq" => Ok(RankMode::Lq),
            "lc" => Ok(RankMode::Lc),
            "baseline" => Ok(RankMode::Baseline),
            _ => Err(Error::InvalidArgument(format!("unknown rank mode {s:?}"))),
        }
    }
}

/// Flattens one query's clustering into a ranked list using the L_q or L_c
/// cluster ordering.
///
/// If the query shares no term with the clustered documents, L_c has no
/// CA signature to compare and falls back to cluster index order.
pub fn rank_query(
    index: &Index,
    record: &PartitionRecord,
    query: &Query,
    mode: RankMode,
    qrels: Option<&Qrels>,
    fca: &FcaConfig,
) -> Result<RankedRun> {
    if record.query_id != query.query_id {
        return Err(Error::InvalidArgument(format!(
            "partition is for query {:?}, not {:?}",
            record.query_id, query.query_id
        )));
    }
    let members = record.clusters.values().flatten().map(String::as_str);
    let Some((docs, space)) = candidate_docs(index, members)? else {
        return Ok(RankedRun::from_scored(
            query.query_id.clone(),
            record.unclustered.iter().map(|d| (d.clone(), 0.0)),
        ));
    };
    let partition = record.to_partition(docs)?;
    let local_query = space.project(&query.vector).normalized();
    let dense_query = local_query.to_dense(space.dim());

    let ordering = match mode {
        RankMode::Lq => {
            let qrels = qrels.ok_or_else(|| Error::InvalidArgument("L_q ordering needs relevance judgments".into()))?;
            rank_clusters_oracle(&partition, qrels, &query.query_id)?
        }
        RankMode::Lc if local_query.is_zero() => rank_clusters_centroid(&partition, &query.query_id, &dense_query),
        RankMode::Lc => rank_clusters_ca(&partition, &query.query_id, &dense_query, fca)?,
        RankMode::Baseline => {
            return Err(Error::InvalidArgument("baseline mode does not use partitions".into()));
        }
    };
    flatten(&ordering, &partition, &local_query, &record.unclustered)
}

/// Macro-averaged scores of one synthetic-collection run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub seed: u64,
    pub k: usize,
    pub map_baseline: f64,
    pub map_lq: f64,
    pub map_lc: f64,
    pub p10_baseline: f64,
    pub p10_lq: f64,
    pub p10_lc: f64,
    /// Number of queries whose L_q and L_c cluster orderings differ.
    pub orderings_differ: usize,
    /// Mean local-search energy and mean K-Means energy over queries.
    pub lsc_energy: f64,
    pub kmeans_energy: f64,
}

impl ExperimentOutcome {
    pub const CSV_HEADER: &'static str =
        "seed,k,map_baseline,map_lq,map_lc,p10_baseline,p10_lq,p10_lc,orderings_differ,lsc_energy,kmeans_energy\n";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{:.6},{:.6}\n",
            self.seed,
            self.k,
            self.map_baseline,
            self.map_lq,
            self.map_lc,
            self.p10_baseline,
            self.p10_lq,
            self.p10_lc,
            self.orderings_differ,
            self.lsc_energy,
            self.kmeans_energy
        )
    }
}

/// Generates a synthetic collection and runs baseline, L_q and L_c over it.
/// `spec.seed` drives both the corpus and the initial partitions.
pub fn run_experiment(
    spec: &SynthSpec,
    k: usize,
    depth: usize,
    fca: &FcaConfig,
    max_iters: Option<usize>,
) -> Result<ExperimentOutcome> {
    let corpus = synth_corpus(spec)?;
    let index = Index::build(&corpus.documents)?;
    let queries: Vec<Query> = corpus
        .queries
        .iter()
        .map(|(id, text)| index.query(id.clone(), text.clone()))
        .collect();
    let baseline = search(&index, &queries, depth);

    let mut lq = Vec::new();
    let mut lc = Vec::new();
    let mut differ = 0;
    let (mut lsc_energy, mut km_energy) = (0.0, 0.0);
    for q in &queries {
        let run = baseline.get(&q.query_id).expect("every query was searched");
        let record = cluster_query(&index, run, k, spec.seed, max_iters)?;
        lsc_energy += record.energy;
        km_energy += record.kmeans_energy.unwrap_or(0.0);
        let a = rank_query(&index, &record, q, RankMode::Lq, Some(&corpus.qrels), fca)?;
        let b = rank_query(&index, &record, q, RankMode::Lc, None, fca)?;
        if a.doc_ids().ne(b.doc_ids()) {
            differ += 1;
        }
        lq.push(a);
        lc.push(b);
    }
    let n = queries.len() as f64;
    let report = |runs: &RunSet| PrecisionReport::evaluate(runs, &corpus.qrels);
    let rb = report(&baseline)?;
    let rq = report(&RunSet::new("lq", lq))?;
    let rc = report(&RunSet::new("lc", lc))?;
    Ok(ExperimentOutcome {
        seed: spec.seed,
        k,
        map_baseline: rb.map(),
        map_lq: rq.map(),
        map_lc: rc.map(),
        p10_baseline: rb.mean.p10,
        p10_lq: rq.mean.p10,
        p10_lc: rc.mean.p10,
        orderings_differ: differ,
        lsc_energy: lsc_energy / n,
        kmeans_energy: km_energy / n,
    })
}

/// Groups records by query id, rejecting duplicates.
pub fn records_by_query(records: Vec<PartitionRecord>) -> Result<BTreeMap<String, PartitionRecord>> {
    let mut out = BTreeMap::new();
    for r in records {
        if let Some(prev) = out.insert(r.query_id.clone(), r) {
            return Err(Error::DuplicateId(prev.query_id));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::Document;

    fn toy() -> (Index, Qrels) {
        let docs = vec![
            Document::new("a1", "apple banana cherry"),
            Document::new("a2", "apple banana grape"),
            Document::new("a3", "banana cherry grape"),
            Document::new("b1", "river stone water"),
            Document::new("b2", "river water moss"),
            Document::new("b3", "stone moss water"),
            Document::new("z1", "x"),
        ];
        let qrels = Qrels::parse("q1 0 a1 1\nq1 0 a2 1\nq1 0 a3 1\n", "q").unwrap();
        (Index::build(&docs).unwrap(), qrels)
    }

    #[test]
    fn local_space_projection() {
        let a = SparseVector::from_pairs(vec![(7, 1.0), (3, 2.0)]);
        let b = SparseVector::from_pairs(vec![(9, 1.0)]);
        let s = LocalSpace::new([&a, &b]);
        assert_eq!(s.dim(), 3);
        assert_eq!(s.project(&a).entries(), &[(0, 2.0), (1, 1.0)]);
        assert_eq!(
            s.project(&SparseVector::from_pairs(vec![(5, 1.0), (9, 3.0)])).entries(),
            &[(2, 3.0)]
        );
    }

    #[test]
    fn toy_pipeline_puts_relevant_cluster_first() {
        let (index, qrels) = toy();
        let q = index.query("q1", "banana");
        let run = index.retrieve_top_k(&q, 100);
        assert_eq!(run.len(), 7);
        let record = cluster_query(&index, &run, 2, 3, None).unwrap();
        assert_eq!(record.unclustered, vec!["z1"]);
        assert!(record.converged);
        assert!(record.energy_trace.windows(2).all(|w| w[1] > w[0]));

        let lq = rank_query(&index, &record, &q, RankMode::Lq, Some(&qrels), &FcaConfig::default()).unwrap();
        let top: Vec<_> = lq.doc_ids().take(3).collect();
        assert!(top.iter().all(|d| d.starts_with('a')), "{top:?}");
        assert_eq!(lq.entries.last().unwrap().doc_id, "z1");

        let lc = rank_query(&index, &record, &q, RankMode::Lc, None, &FcaConfig::default()).unwrap();
        assert_eq!(lc.len(), 7);
        assert!(rank_query(&index, &record, &q, RankMode::Lq, None, &FcaConfig::default()).is_err());
    }

    #[test]
    fn unknown_documents_rejected() {
        let (index, _) = toy();
        let run = RankedRun::from_scored("q1", vec![("nope".to_string(), 1.0)]);
        assert!(cluster_query(&index, &run, 2, 0, None).is_err());
    }

    #[test]
    fn all_zero_candidates() {
        let (index, _) = toy();
        let run = RankedRun::from_scored("q1", vec![("z1".to_string(), 0.0)]);
        let record = cluster_query(&index, &run, 3, 0, None).unwrap();
        assert_eq!(record.clusters.len(), 3);
        let q = index.query("q1", "apple");
        let out = rank_query(&index, &record, &q, RankMode::Lc, None, &FcaConfig::default()).unwrap();
        assert_eq!(out.doc_ids().collect::<Vec<_>>(), vec!["z1"]);
    }

    #[test]
    fn modes_parse() {
        assert_eq!("lq".parse::<RankMode>().unwrap(), RankMode::Lq);
        assert!("lx".parse::<RankMode>().is_err());
    }
}
