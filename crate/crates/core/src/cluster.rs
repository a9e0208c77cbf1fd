//! Steepest-ascent local search clustering of unit document vectors.
//!
//! The objective is `E(P) = sum_i ||D_i||` where `D_i` is the sum of the
//! member vectors of cluster `i`. Moving a unit vector `d` out of cluster
//! `i` and into cluster `j` changes the energy by
//!
//! ```text
//! sqrt(||D_i||^2 - 2||D_i|| (d . c_i) + 1) - ||D_i||      (removal)
//! sqrt(||D_j||^2 + 2||D_j|| (d . c_j) + 1) - ||D_j||      (insertion)
//! ```
//!
//! with `c = D / ||D||`. Each [`Partition::tcls_step`] evaluates every
//! single-document move and applies the one with the largest gain;
//! [`Partition::lsc`] repeats that until no move improves the energy.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{dense_norm, SparseVector};

/// Moves whose gain does not exceed this are treated as non-improving, so
/// rounding noise cannot keep the search alive.
pub const MIN_GAIN: f64 = 1e-12;

/// Composites are rebuilt from their members after this many moves.
pub const RECOMPUTE_INTERVAL: usize = 1024;

const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterDoc {
    pub doc_id: String,
    pub vector: SparseVector,
}

impl ClusterDoc {
    pub fn new(doc_id: impl Into<String>, vector: SparseVector) -> Self {
        ClusterDoc {
            doc_id: doc_id.into(),
            vector,
        }
    }

    pub fn dense(doc_id: impl Into<String>, v: &[f64]) -> Self {
        ClusterDoc::new(doc_id, SparseVector::from_dense(v))
    }
}

/// The documents being clustered, sorted by doc id, all unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct DocSet {
    docs: Vec<ClusterDoc>,
    dim: usize,
}

impl DocSet {
    pub fn new(mut docs: Vec<ClusterDoc>, dim: usize) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::InvalidArgument("no documents to cluster".into()));
        }
        docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        for w in docs.windows(2) {
            if w[0].doc_id == w[1].doc_id {
                return Err(Error::DuplicateId(w[0].doc_id.clone()));
            }
        }
        for d in &docs {
            if d.vector.is_zero() {
                return Err(Error::ZeroVector);
            }
            let norm = d.vector.norm();
            if (norm - 1.0).abs() > UNIT_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "document {:?} has norm {norm}, expected 1",
                    d.doc_id
                )));
            }
            if d.vector.min_dim() > dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: d.vector.min_dim(),
                });
            }
        }
        Ok(DocSet { docs, dim })
    }

    /// Convenience for dense inputs; the dimension is taken from the longest.
    pub fn from_dense(docs: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let dim = docs.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        DocSet::new(docs.into_iter().map(|(id, v)| ClusterDoc::dense(id, &v)).collect(), dim)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn docs(&self) -> &[ClusterDoc] {
        &self.docs
    }

    pub fn get(&self, idx: usize) -> &ClusterDoc {
        &self.docs[idx]
    }

    pub fn position(&self, doc_id: &str) -> Option<usize> {
        self.docs.binary_search_by(|d| d.doc_id.as_str().cmp(doc_id)).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Indices into the [`DocSet`], ascending (and therefore in doc id order).
    members: Vec<usize>,
    composite: Vec<f64>,
    norm: f64,
}

impl Cluster {
    fn empty(dim: usize) -> Self {
        Cluster {
            members: Vec::new(),
            composite: vec![0.0; dim],
            norm: 0.0,
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `D_i`, the sum of member vectors.
    pub fn composite(&self) -> &[f64] {
        &self.composite
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `D_i / ||D_i||`, or `None` for an empty cluster.
    pub fn centroid(&self) -> Option<Vec<f64>> {
        (self.norm > 0.0).then(|| self.composite.iter().map(|x| x / self.norm).collect())
    }

    fn contains(&self, idx: usize) -> bool {
        self.members.binary_search(&idx).is_ok()
    }

    fn rebuild(&mut self, docs: &DocSet) {
        self.composite.iter_mut().for_each(|x| *x = 0.0);
        for &m in &self.members {
            docs.get(m).vector.axpy_into(1.0, &mut self.composite);
        }
        self.norm = dense_norm(&self.composite);
    }

    /// Closed-form energy change for removing member `d`.
    fn removal_gain(&self, d: &SparseVector) -> f64 {
        if self.members.len() == 1 {
            return -1.0;
        }
        let n = self.norm;
        let dc = d.dot_dense(&self.composite) / n;
        (n * n - 2.0 * n * dc + 1.0).max(0.0).sqrt() - n
    }

    /// Closed-form energy change for inserting non-member `d`.
    fn insertion_gain(&self, d: &SparseVector) -> f64 {
        if self.members.is_empty() {
            return 1.0;
        }
        let n = self.norm;
        let dc = d.dot_dense(&self.composite) / n;
        (n * n + 2.0 * n * dc + 1.0).max(0.0).sqrt() - n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveCandidate {
    pub doc_id: String,
    pub source: usize,
    pub target: usize,
    pub delta: f64,
}

/// Outcome of [`Partition::lsc`].
#[derive(Debug, Clone, PartialEq)]
pub struct LscOutcome {
    pub iterations: usize,
    /// Energy before the first move, then after each move.
    pub energy_trace: Vec<f64>,
    /// True when the search stopped because no improving move was left.
    pub converged: bool,
}

/// A partition of a [`DocSet`] into `K` (possibly empty) clusters.
#[derive(Debug, Clone)]
pub struct Partition {
    docs: Arc<DocSet>,
    clusters: Vec<Cluster>,
    assignment: Vec<usize>,
    energy: f64,
    moves_since_rebuild: usize,
}

impl Partition {
    /// Seeded start: shuffle the documents, then deal them round-robin.
    pub fn init(docs: Arc<DocSet>, k: usize, seed: u64) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidArgument("cluster count K must be at least 1".into()));
        }
        let mut order: Vec<usize> = (0..docs.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut assignment = vec![0; docs.len()];
        for (pos, &doc) in order.iter().enumerate() {
            assignment[doc] = pos % k;
        }
        Partition::from_assignment(docs, k, assignment)
    }

    /// Builds a partition from an explicit doc-index → cluster map.
    pub fn from_assignment(docs: Arc<DocSet>, k: usize, assignment: Vec<usize>) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidArgument("cluster count K must be at least 1".into()));
        }
        if assignment.len() != docs.len() {
            return Err(Error::DimensionMismatch {
                expected: docs.len(),
                actual: assignment.len(),
            });
        }
        if let Some(&bad) = assignment.iter().find(|&&c| c >= k) {
            return Err(Error::InvalidArgument(format!(
                "cluster index {bad} out of range for K={k}"
            )));
        }
        let mut clusters = vec![Cluster::empty(docs.dim()); k];
        for (doc, &c) in assignment.iter().enumerate() {
            clusters[c].members.push(doc);
        }
        let mut p = Partition {
            docs,
            clusters,
            assignment,
            energy: 0.0,
            moves_since_rebuild: 0,
        };
        p.rebuild();
        Ok(p)
    }

    /// Builds a partition from groups of doc ids; every doc must appear once.
    pub fn from_groups(docs: Arc<DocSet>, groups: &[Vec<&str>]) -> Result<Self> {
        let mut assignment = vec![usize::MAX; docs.len()];
        for (c, group) in groups.iter().enumerate() {
            for id in group {
                let idx = docs
                    .position(id)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown document {id:?}")))?;
                if assignment[idx] != usize::MAX {
                    return Err(Error::DuplicateId(id.to_string()));
                }
                assignment[idx] = c;
            }
        }
        if let Some(missing) = assignment.iter().position(|&c| c == usize::MAX) {
            return Err(Error::InvalidArgument(format!(
                "document {:?} is not assigned",
                docs.get(missing).doc_id
            )));
        }
        Partition::from_assignment(docs, groups.len().max(1), assignment)
    }

    pub fn docs(&self) -> &Arc<DocSet> {
        &self.docs
    }

    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster(&self, i: usize) -> &Cluster {
        &self.clusters[i]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_of(&self, doc_id: &str) -> Option<usize> {
        self.docs.position(doc_id).map(|i| self.assignment[i])
    }

    /// Member doc ids of cluster `i`, in doc id order.
    pub fn member_ids(&self, i: usize) -> Vec<&str> {
        self.clusters[i]
            .members
            .iter()
            .map(|&m| self.docs.get(m).doc_id.as_str())
            .collect()
    }

    /// Tracked energy, maintained incrementally.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Energy recomputed from member vectors, ignoring cached composites.
    pub fn exact_energy(&self) -> f64 {
        (0..self.k()).map(|i| dense_norm(&self.exact_composite(i))).sum()
    }

    /// `D_i` summed from scratch in member order, free of update drift.
    pub fn exact_composite(&self, i: usize) -> Vec<f64> {
        let mut sum = vec![0.0; self.docs.dim()];
        for &m in &self.clusters[i].members {
            self.docs.get(m).vector.axpy_into(1.0, &mut sum);
        }
        sum
    }

    /// Centroid of [`Self::exact_composite`], or `None` for an empty cluster.
    ///
    /// Rankers use this rather than [`Cluster::centroid`]: incremental
    /// updates leave residues near 1e-17 in components that should be 0,
    /// enough to reorder clusters that are all orthogonal to a query.
    pub fn exact_centroid(&self, i: usize) -> Option<Vec<f64>> {
        let sum = self.exact_composite(i);
        let n = dense_norm(&sum);
        (n > 0.0).then(|| sum.iter().map(|x| x / n).collect())
    }

    /// Largest deviation between cached composites and an exact recomputation.
    pub fn composite_drift(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, c) in self.clusters.iter().enumerate() {
            for (a, b) in self.exact_composite(i).iter().zip(&c.composite) {
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }

    fn rebuild(&mut self) {
        for c in &mut self.clusters {
            c.rebuild(&self.docs);
        }
        self.energy = self.clusters.iter().map(|c| c.norm).sum();
        self.moves_since_rebuild = 0;
    }

    fn doc_index(&self, doc_id: &str) -> Result<usize> {
        self.docs
            .position(doc_id)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown document {doc_id:?}")))
    }

    /// `E(S_i - {d}) - E(S_i)` for a member `d` of cluster `i`.
    pub fn delta_remove(&self, cluster: usize, doc_id: &str) -> Result<f64> {
        let idx = self.doc_index(doc_id)?;
        let c = &self.clusters[cluster];
        if !c.contains(idx) {
            return Err(Error::NotMember {
                doc_id: doc_id.to_string(),
                cluster,
            });
        }
        Ok(c.removal_gain(&self.docs.get(idx).vector))
    }

    /// `E(S_j + {d}) - E(S_j)` for a document `d` outside cluster `j`.
    pub fn delta_add(&self, cluster: usize, doc_id: &str) -> Result<f64> {
        let idx = self.doc_index(doc_id)?;
        let c = &self.clusters[cluster];
        if c.contains(idx) {
            return Err(Error::AlreadyMember {
                doc_id: doc_id.to_string(),
                cluster,
            });
        }
        Ok(c.insertion_gain(&self.docs.get(idx).vector))
    }

    /// The best single-document move, if its gain exceeds [`MIN_GAIN`].
    ///
    /// Documents are scanned in doc id order and targets in index order; only
    /// a strictly larger gain replaces the incumbent, so ties go to the
    /// smallest doc id, then the smallest target.
    pub fn best_move(&self) -> Option<MoveCandidate> {
        let mut best: Option<(usize, usize, usize, f64)> = None;
        let mut best_gain = MIN_GAIN;
        for (doc, &src) in self.assignment.iter().enumerate() {
            let d = &self.docs.get(doc).vector;
            let removal = self.clusters[src].removal_gain(d);
            for (tgt, c) in self.clusters.iter().enumerate() {
                if tgt == src {
                    continue;
                }
                let gain = removal + c.insertion_gain(d);
                if gain > best_gain {
                    best_gain = gain;
                    best = Some((doc, src, tgt, gain));
                }
            }
        }
        best.map(|(doc, source, target, delta)| MoveCandidate {
            doc_id: self.docs.get(doc).doc_id.clone(),
            source,
            target,
            delta,
        })
    }

    /// Moves a document between clusters, updating both composites.
    pub fn apply_move(&mut self, doc_id: &str, target: usize) -> Result<()> {
        let idx = self.doc_index(doc_id)?;
        if target >= self.k() {
            return Err(Error::InvalidArgument(format!("cluster index {target} out of range")));
        }
        let source = self.assignment[idx];
        if source == target {
            return Ok(());
        }
        let vector = &self.docs.get(idx).vector;
        for (ci, sign) in [(source, -1.0), (target, 1.0)] {
            let c = &mut self.clusters[ci];
            if sign < 0.0 {
                let pos = c.members.binary_search(&idx).expect("assignment consistent");
                c.members.remove(pos);
            } else {
                let pos = c.members.binary_search(&idx).unwrap_err();
                c.members.insert(pos, idx);
            }
            if c.members.is_empty() {
                c.composite.iter_mut().for_each(|x| *x = 0.0);
                c.norm = 0.0;
            } else {
                vector.axpy_into(sign, &mut c.composite);
                c.norm = dense_norm(&c.composite);
            }
        }
        self.assignment[idx] = target;
        self.moves_since_rebuild += 1;
        if self.moves_since_rebuild >= RECOMPUTE_INTERVAL {
            self.rebuild();
        } else {
            self.energy = self.clusters.iter().map(|c| c.norm).sum();
        }
        Ok(())
    }

    /// One steepest-ascent step: applies and returns the best improving
    /// move, or returns `None` and leaves the partition untouched.
    pub fn tcls_step(&mut self) -> Option<MoveCandidate> {
        let mv = self.best_move()?;
        self.apply_move(&mv.doc_id, mv.target).expect("candidate is valid");
        Some(mv)
    }

    /// Runs [`Self::tcls_step`] until no improving move remains or
    /// `max_iters` moves have been made.
    pub fn lsc(&mut self, max_iters: usize) -> LscOutcome {
        let mut trace = vec![self.energy];
        let mut iterations = 0;
        let converged;
        loop {
            if iterations >= max_iters {
                // a capped run may still happen to sit at a local optimum
                converged = self.best_move().is_none();
                break;
            }
            match self.tcls_step() {
                Some(_) => {
                    iterations += 1;
                    trace.push(self.energy);
                }
                None => {
                    converged = true;
                    break;
                }
            }
        }
        LscOutcome {
            iterations,
            energy_trace: trace,
            converged,
        }
    }

    /// Safety cap used when none is configured: ten moves per document.
    pub fn default_max_iters(&self) -> usize {
        10 * self.docs.len()
    }

    /// One spherical K-Means reassignment: every document moves to the
    /// nonempty cluster whose centroid it is most similar to (ties to the
    /// lowest index). Returns the number of documents that changed cluster.
    pub fn kmeans_pass(&mut self) -> usize {
        let centroids: Vec<Option<Vec<f64>>> = self.clusters.iter().map(Cluster::centroid).collect();
        let mut changed = 0;
        let mut next = self.assignment.clone();
        for (doc, slot) in next.iter_mut().enumerate() {
            let d = &self.docs.get(doc).vector;
            let mut best: Option<(usize, f64)> = None;
            for (j, c) in centroids.iter().enumerate() {
                let Some(c) = c else { continue };
                let sim = d.dot_dense(c);
                if best.is_none_or(|(_, s)| sim > s) {
                    best = Some((j, sim));
                }
            }
            let (j, _) = best.expect("at least one nonempty cluster");
            if j != *slot {
                changed += 1;
                *slot = j;
            }
        }
        if changed > 0 {
            for c in &mut self.clusters {
                c.members.clear();
            }
            for (doc, &c) in next.iter().enumerate() {
                self.clusters[c].members.push(doc);
            }
            self.assignment = next;
        }
        self.rebuild();
        changed
    }

    /// Repeats [`Self::kmeans_pass`] until nothing moves or `max_passes`.
    /// Returns the number of passes that changed the partition.
    pub fn kmeans(&mut self, max_passes: usize) -> usize {
        let mut passes = 0;
        while passes < max_passes && self.kmeans_pass() > 0 {
            passes += 1;
        }
        passes
    }

    /// Checks that every document sits in exactly the cluster its
    /// assignment says.
    pub fn is_consistent(&self) -> bool {
        let mut seen = HashSet::new();
        for (ci, c) in self.clusters.iter().enumerate() {
            for &m in &c.members {
                if !seen.insert(m) || self.assignment[m] != ci {
                    return false;
                }
            }
        }
        seen.len() == self.docs.len()
    }

    pub fn to_record(&self, query_id: &str, outcome: Option<&LscOutcome>) -> PartitionRecord {
        PartitionRecord {
            query_id: query_id.to_string(),
            k: self.k(),
            energy: self.energy,
            iterations: outcome.map_or(0, |o| o.iterations),
            converged: outcome.is_none_or(|o| o.converged),
            energy_trace: outcome.map(|o| o.energy_trace.clone()).unwrap_or_default(),
            kmeans_energy: None,
            clusters: (0..self.k())
                .map(|i| (i, self.member_ids(i).into_iter().map(String::from).collect()))
                .collect(),
            unclustered: Vec::new(),
        }
    }
}

/// Serialized clustering of one query's candidate set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRecord {
    pub query_id: String,
    pub k: usize,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub energy_trace: Vec<f64>,
    /// Energy reached by spherical K-Means from the same start, if run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmeans_energy: Option<f64>,
    /// Cluster index → member doc ids in doc id order. Empty clusters kept.
    pub clusters: BTreeMap<usize, Vec<String>>,
    /// Candidates that could not be clustered (zero vectors), by doc id.
    #[serde(default)]
    pub unclustered: Vec<String>,
}

impl PartitionRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }

    /// Rebuilds the partition over `docs`. Members missing from `docs` are
    /// an error.
    pub fn to_partition(&self, docs: Arc<DocSet>) -> Result<Partition> {
        let groups: Vec<Vec<&str>> = (0..self.k)
            .map(|i| {
                self.clusters
                    .get(&i)
                    .map(|g| g.iter().map(String::as_str).collect())
                    .unwrap_or_default()
            })
            .collect();
        Partition::from_groups(docs, &groups)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn docset(docs: &[(&str, &[f64])]) -> Arc<DocSet> {
        Arc::new(DocSet::from_dense(docs.iter().map(|(id, v)| (id.to_string(), v.to_vec())).collect()).unwrap())
    }

    fn three_docs() -> Arc<DocSet> {
        docset(&[("d1", &[1.0, 0.0]), ("d2", &[1.0, 0.0]), ("d3", &[0.0, 1.0])])
    }

    #[test]
    fn docset_validation() {
        assert!(DocSet::from_dense(vec![]).is_err());
        assert!(matches!(
            DocSet::from_dense(vec![("a".into(), vec![0.0, 0.0])]),
            Err(Error::ZeroVector)
        ));
        assert!(DocSet::from_dense(vec![("a".into(), vec![2.0])]).is_err());
        assert!(matches!(
            DocSet::from_dense(vec![("a".into(), vec![1.0]), ("a".into(), vec![1.0])]),
            Err(Error::DuplicateId(_))
        ));
    }

    #[test]
    fn init_is_balanced_and_seeded() {
        let docs = docset(&[
            ("a", &[1.0, 0.0]),
            ("b", &[0.0, 1.0]),
            ("c", &[1.0, 0.0]),
            ("d", &[0.0, 1.0]),
        ]);
        for seed in 0..20 {
            let p = Partition::init(docs.clone(), 2, seed).unwrap();
            assert_eq!(p.cluster(0).len(), 2);
            assert_eq!(p.cluster(1).len(), 2);
            let q = Partition::init(docs.clone(), 2, seed).unwrap();
            assert_eq!(p.assignment(), q.assignment());
        }
        let p = Partition::init(docs.clone(), 1, 3).unwrap();
        assert_eq!(p.cluster(0).len(), 4);
        assert!((p.energy() - 8f64.sqrt()).abs() < 1e-12);
        assert!(Partition::init(docs, 0, 1).is_err());
    }

    #[test]
    fn energy_examples() {
        let same = docset(&[("a", &[1.0, 0.0]), ("b", &[1.0, 0.0])]);
        let p = Partition::from_assignment(same, 1, vec![0, 0]).unwrap();
        assert!((p.exact_energy() - 2.0).abs() < 1e-12);

        let orth = docset(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let p = Partition::from_assignment(orth.clone(), 1, vec![0, 0]).unwrap();
        assert!((p.exact_energy() - std::f64::consts::SQRT_2).abs() < 1e-8);

        let p = Partition::from_assignment(orth, 2, vec![0, 1]).unwrap();
        assert!((p.exact_energy() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn removal_examples() {
        let orth = docset(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let p = Partition::from_assignment(orth, 2, vec![0, 0]).unwrap();
        assert!((p.delta_remove(0, "b").unwrap() - (1.0 - SQRT2)).abs() < 1e-12);
        assert!(matches!(p.delta_remove(1, "b"), Err(Error::NotMember { .. })));

        let same = docset(&[("a", &[1.0, 0.0]), ("b", &[1.0, 0.0])]);
        let p = Partition::from_assignment(same, 2, vec![0, 0]).unwrap();
        assert!((p.delta_remove(0, "a").unwrap() + 1.0).abs() < 1e-12);

        let p = Partition::from_assignment(three_docs(), 2, vec![0, 1, 1]).unwrap();
        assert_eq!(p.delta_remove(0, "d1").unwrap(), -1.0);
    }

    #[test]
    fn insertion_examples() {
        let p = Partition::from_assignment(three_docs(), 2, vec![0, 1, 1]).unwrap();
        // cluster 0 = {(1,0)}
        assert!((p.delta_add(0, "d2").unwrap() - 1.0).abs() < 1e-12);
        assert!((p.delta_add(0, "d3").unwrap() - (SQRT2 - 1.0)).abs() < 1e-12);
        assert!(matches!(p.delta_add(0, "d1"), Err(Error::AlreadyMember { .. })));

        let p = Partition::from_assignment(three_docs(), 3, vec![0, 0, 0]).unwrap();
        assert_eq!(p.delta_add(2, "d3").unwrap(), 1.0);
    }

    #[test]
    fn step_moves_best_document() {
        let mut p = Partition::from_assignment(three_docs(), 2, vec![0, 1, 1]).unwrap();
        let before = p.energy();
        let mv = p.tcls_step().unwrap();
        assert_eq!(mv.doc_id, "d2");
        assert_eq!((mv.source, mv.target), (1, 0));
        assert!((mv.delta - (3.0 - (1.0 + SQRT2))).abs() < 1e-9);
        assert!((mv.delta - 0.585_786_44).abs() < 1e-8);
        assert!((p.energy() - before - mv.delta).abs() < 1e-12);
        assert_eq!(p.member_ids(0), vec!["d1", "d2"]);
        assert!(p.is_consistent());
    }

    #[test]
    fn no_move_at_local_optimum() {
        let same = docset(&[("a", &[0.6, 0.8]), ("b", &[0.6, 0.8]), ("c", &[0.6, 0.8])]);
        let mut p = Partition::from_assignment(same, 3, vec![1, 1, 1]).unwrap();
        let before = p.assignment().to_vec();
        assert!(p.tcls_step().is_none());
        assert_eq!(p.assignment(), &before[..]);

        let single = docset(&[("a", &[1.0])]);
        let mut p = Partition::init(single, 2, 0).unwrap();
        assert!(p.tcls_step().is_none());
    }

    #[test]
    fn lsc_examples() {
        let mut p = Partition::from_assignment(three_docs(), 2, vec![0, 1, 1]).unwrap();
        let out = p.lsc(100);
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert!((p.energy() - 3.0).abs() < 1e-12);
        assert_eq!(p.member_ids(0), vec!["d1", "d2"]);
        assert_eq!(p.member_ids(1), vec!["d3"]);

        let mut again = p.clone();
        let out = again.lsc(100);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.energy_trace.len(), 1);

        let mut q = Partition::from_assignment(three_docs(), 2, vec![0, 1, 1]).unwrap();
        let out = q.lsc(0);
        assert_eq!(out.iterations, 0);
        assert!(!out.converged);
        assert_eq!(q.assignment(), &[0, 1, 1]);
    }

    #[test]
    fn kmeans_examples() {
        let docs = docset(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let mut p = Partition::from_assignment(docs.clone(), 2, vec![0, 1]).unwrap();
        assert_eq!(p.kmeans_pass(), 0);
        assert_eq!(p.assignment(), &[0, 1]);

        // two groups whose centroids are swapped relative to the majority
        let docs = docset(&[
            ("a1", &[1.0, 0.0]),
            ("a2", &[1.0, 0.0]),
            ("a3", &[1.0, 0.0]),
            ("b1", &[0.0, 1.0]),
            ("b2", &[0.0, 1.0]),
            ("b3", &[0.0, 1.0]),
        ]);
        // cluster 0 mostly b's, cluster 1 mostly a's
        let mut p = Partition::from_assignment(docs.clone(), 2, vec![1, 1, 0, 0, 0, 1]).unwrap();
        p.kmeans_pass();
        assert_eq!(p.assignment(), &[1, 1, 1, 0, 0, 0]);
        assert!((p.energy() - 6.0).abs() < 1e-12);

        let mut p = Partition::from_assignment(docs, 1, vec![0; 6]).unwrap();
        assert_eq!(p.kmeans_pass(), 0);
    }

    #[test]
    fn record_round_trip() {
        let mut p = Partition::from_assignment(three_docs(), 3, vec![0, 1, 1]).unwrap();
        let out = p.lsc(10);
        let rec = p.to_record("q1", Some(&out));
        let back: PartitionRecord = serde_json::from_str(&rec.to_json()).unwrap();
        assert_eq!(back, rec);
        assert_eq!(rec.clusters[&2], Vec::<String>::new());
        let rebuilt = rec.to_partition(three_docs()).unwrap();
        assert_eq!(rebuilt.assignment(), p.assignment());
    }

    #[test]
    fn periodic_rebuild_bounds_drift() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let docs: Vec<(String, Vec<f64>)> = (0..30)
            .map(|i| {
                let v: Vec<f64> = (0..8).map(|_| rng.gen::<f64>()).collect();
                let n = dense_norm(&v);
                (format!("d{i:02}"), v.iter().map(|x| x / n).collect())
            })
            .collect();
        let docs = Arc::new(DocSet::from_dense(docs).unwrap());
        let mut p = Partition::init(docs.clone(), 4, 1).unwrap();
        for _ in 0..3000 {
            let d = rng.gen_range(0..docs.len());
            let t = rng.gen_range(0..4);
            p.apply_move(&docs.get(d).doc_id.clone(), t).unwrap();
            assert!(p.composite_drift() <= 1e-7);
            assert!(p.energy() <= docs.len() as f64 + 1e-9);
        }
        assert!(p.is_consistent());
        assert!((p.energy() - p.exact_energy()).abs() <= 1e-7);
    }
}
