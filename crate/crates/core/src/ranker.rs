//! Cluster orderings for a query and their flattening into ranked lists.
//!
//! Two orderings are provided: an oracle ordering by the number of relevant
//! members, and one by distance between fuzzy-CA attractors of the query
//! and each cluster centroid.

use serde::{Deserialize, Serialize};

use crate::cluster::Partition;
use crate::error::{Error, Result};
use crate::eval::Qrels;
use crate::fca::{encode_vector, Automaton, FuzzyState, RuleVector, DEFAULT_MAX_STEPS};
use crate::run::RankedRun;
use crate::vector::{dense_cosine, SparseVector};

pub const DEFAULT_RULES: &str = "238,254,238,252";
pub const DEFAULT_CELLS: usize = 16;

/// Settings of the CA classifier used for cluster distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcaConfig {
    /// Rule pattern, repeated cyclically across the cells.
    pub rules: RuleVector,
    pub cells: usize,
    pub max_steps: usize,
}

impl Default for FcaConfig {
    fn default() -> Self {
        FcaConfig {
            rules: DEFAULT_RULES.parse().expect("default rules are valid"),
            cells: DEFAULT_CELLS,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl FcaConfig {
    /// Rule 204 on every cell: each state is its own fixed point.
    pub fn identity(cells: usize) -> Self {
        FcaConfig {
            rules: RuleVector::from_codes(&[204]).expect("204 is a valid rule"),
            cells,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    /// The automaton used for vectors of dimension `dim`. The cell count is
    /// capped at `dim` so every cell receives at least one component.
    pub fn automaton(&self, dim: usize) -> Result<Automaton> {
        let n = self.cells.min(dim);
        if n == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(Automaton::new(self.rules.cyclic(n)?))
    }
}

/// Attractor signature of a vector under a configured automaton.
pub fn attractor(v: &[f64], ca: &Automaton, max_steps: usize) -> Result<FuzzyState> {
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroVector);
    }
    let state = encode_vector(v, ca.size())?;
    Ok(ca.evolve(&state, max_steps)?.attractor)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaDistance {
    /// `1 - cos(attractor(query), attractor(centroid))`
    pub distance: f64,
    /// `1 - cos(query, centroid)`, used to break ties.
    pub raw: f64,
}

/// Distance between a query and a centroid through their CA attractors.
pub fn ca_distance(query: &[f64], centroid: &[f64], cfg: &FcaConfig) -> Result<CaDistance> {
    if query.len() != centroid.len() {
        return Err(Error::DimensionMismatch {
            expected: query.len(),
            actual: centroid.len(),
        });
    }
    let ca = cfg.automaton(query.len())?;
    let aq = attractor(query, &ca, cfg.max_steps)?;
    let ac = attractor(centroid, &ca, cfg.max_steps)?;
    Ok(CaDistance {
        distance: 1.0 - dense_cosine(aq.cells(), ac.cells()),
        raw: 1.0 - dense_cosine(query, centroid),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingKind {
    /// By number of relevant members, descending.
    OracleLq,
    /// By CA distance to the query, ascending.
    CaLc,
    /// By centroid cosine to the query, descending.
    Centroid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOrdering {
    pub query_id: String,
    pub kind: OrderingKind,
    /// Nonempty cluster indices, best first.
    pub order: Vec<usize>,
    /// Score of each entry of `order`.
    pub scores: Vec<f64>,
}

fn nonempty(p: &Partition) -> impl Iterator<Item = usize> + '_ {
    (0..p.k()).filter(|&i| !p.cluster(i).is_empty())
}

/// Orders clusters by how many relevant documents they hold.
pub fn rank_clusters_oracle(p: &Partition, qrels: &Qrels, query_id: &str) -> Result<ClusterOrdering> {
    if !qrels.has_query(query_id) {
        return Err(Error::MissingQrels(query_id.to_string()));
    }
    let mut scored: Vec<(usize, usize)> = nonempty(p)
        .map(|i| {
            let rel = p
                .member_ids(i)
                .into_iter()
                .filter(|d| qrels.is_relevant(query_id, d))
                .count();
            (i, rel)
        })
        .collect();
    scored.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ClusterOrdering {
        query_id: query_id.to_string(),
        kind: OrderingKind::OracleLq,
        order: scored.iter().map(|s| s.0).collect(),
        scores: scored.iter().map(|s| s.1 as f64).collect(),
    })
}

/// Orders clusters by CA distance between query and centroid attractors;
/// ties fall back to raw cosine distance, then cluster index.
pub fn rank_clusters_ca(p: &Partition, query_id: &str, query: &[f64], cfg: &FcaConfig) -> Result<ClusterOrdering> {
    let dim = p.docs().dim();
    if query.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: query.len(),
        });
    }
    let ca = cfg.automaton(dim)?;
    let aq = attractor(query, &ca, cfg.max_steps)?;
    let mut scored = Vec::new();
    for i in nonempty(p) {
        let c = p.exact_centroid(i).expect("nonempty cluster has a centroid");
        let ac = attractor(&c, &ca, cfg.max_steps)?;
        let d = CaDistance {
            distance: 1.0 - dense_cosine(aq.cells(), ac.cells()),
            raw: 1.0 - dense_cosine(query, &c),
        };
        scored.push((i, d));
    }
    scored.sort_by(|a, b| {
        a.1.distance
            .total_cmp(&b.1.distance)
            .then(a.1.raw.total_cmp(&b.1.raw))
            .then(a.0.cmp(&b.0))
    });
    Ok(ClusterOrdering {
        query_id: query_id.to_string(),
        kind: OrderingKind::CaLc,
        order: scored.iter().map(|s| s.0).collect(),
        scores: scored.iter().map(|s| s.1.distance).collect(),
    })
}

/// Orders clusters by plain centroid cosine with the query, best first.
pub fn rank_clusters_centroid(p: &Partition, query_id: &str, query: &[f64]) -> ClusterOrdering {
    let mut scored: Vec<(usize, f64)> = nonempty(p)
        .map(|i| {
            let c = p.exact_centroid(i).expect("nonempty cluster has a centroid");
            (i, dense_cosine(query, &c))
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ClusterOrdering {
        query_id: query_id.to_string(),
        kind: OrderingKind::Centroid,
        order: scored.iter().map(|s| s.0).collect(),
        scores: scored.iter().map(|s| s.1).collect(),
    }
}

/// Concatenates clusters in ordering order. Inside a cluster documents are
/// sorted by cosine with the query (ties by doc id); `unclustered` ids are
/// appended last in the order given.
///
/// Scores are `(C - position) + cos / 2`, with `C` the number of ordered
/// clusters, so blocks never overlap and scores never increase down the list.
pub fn flatten(
    ordering: &ClusterOrdering,
    p: &Partition,
    query: &SparseVector,
    unclustered: &[String],
) -> Result<RankedRun> {
    let mut covered = vec![false; p.k()];
    for &c in &ordering.order {
        if c >= p.k() || covered[c] {
            return Err(Error::InvalidArgument(format!(
                "ordering repeats or exceeds cluster {c}"
            )));
        }
        covered[c] = true;
    }
    if let Some(missing) = nonempty(p).find(|&i| !covered[i]) {
        return Err(Error::InvalidArgument(format!(
            "ordering omits nonempty cluster {missing}"
        )));
    }

    let blocks = ordering.order.len() as f64;
    let docs = p.docs();
    let mut out: Vec<(String, f64)> = Vec::with_capacity(docs.len() + unclustered.len());
    for (pos, &c) in ordering.order.iter().enumerate() {
        let mut members: Vec<(&str, f64)> = p
            .cluster(c)
            .members()
            .iter()
            .map(|&m| {
                let d = docs.get(m);
                (d.doc_id.as_str(), d.vector.dot(query))
            })
            .collect();
        members.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let base = blocks - pos as f64;
        out.extend(
            members
                .into_iter()
                .map(|(id, cos)| (id.to_string(), base + 0.5 * cos.clamp(0.0, 1.0))),
        );
    }
    out.extend(unclustered.iter().map(|id| (id.clone(), 0.0)));
    Ok(RankedRun::from_scored(ordering.query_id.clone(), out))
}
