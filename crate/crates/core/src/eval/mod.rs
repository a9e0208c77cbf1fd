//! Relevance judgments, trec_eval-style scoring and synthetic test
//! collections.

mod metrics;
mod report;
mod synth;

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub use metrics::{average_precision, precision_at_k, recall_precision_curve, RECALL_LEVELS};
pub use report::{compare_runs, Comparison, MetricChange, PrecisionReport, QueryMetrics};
pub use synth::{synth_corpus, SynthCorpus, SynthSpec};

/// Binary relevance judgments keyed by query then document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, bool>>,
}

impl Qrels {
    pub fn new() -> Self {
        Qrels::default()
    }

    /// Records a judgment. Re-judging the same pair is an error.
    pub fn insert(&mut self, query_id: &str, doc_id: &str, relevant: bool) -> Result<()> {
        let q = self.judgments.entry(query_id.to_string()).or_default();
        if q.insert(doc_id.to_string(), relevant).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate judgment for ({query_id}, {doc_id})"
            )));
        }
        Ok(())
    }

    pub fn has_query(&self, query_id: &str) -> bool {
        self.judgments.contains_key(query_id)
    }

    pub fn is_relevant(&self, query_id: &str, doc_id: &str) -> bool {
        self.judgments
            .get(query_id)
            .and_then(|q| q.get(doc_id))
            .copied()
            .unwrap_or(false)
    }

    /// Number of relevant documents for a query (0 if unjudged).
    pub fn num_relevant(&self, query_id: &str) -> usize {
        self.judgments
            .get(query_id)
            .map_or(0, |q| q.values().filter(|&&r| r).count())
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn relevant_docs(&self, query_id: &str) -> impl Iterator<Item = &str> {
        self.judgments
            .get(query_id)
            .into_iter()
            .flat_map(|q| q.iter().filter(|(_, &r)| r).map(|(d, _)| d.as_str()))
    }

    /// Parses `query_id 0 doc_id relevance` lines; relevance > 0 counts as
    /// relevant.
    pub fn parse(text: &str, source: &str) -> Result<Qrels> {
        let mut qrels = Qrels::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::format(
                    source,
                    i + 1,
                    format!("expected 4 fields, found {}", fields.len()),
                ));
            }
            let rel: i64 = fields[3]
                .parse()
                .map_err(|_| Error::format(source, i + 1, format!("bad relevance {:?}", fields[3])))?;
            qrels
                .insert(fields[0], fields[2], rel > 0)
                .map_err(|e| Error::format(source, i + 1, e.to_string()))?;
        }
        Ok(qrels)
    }

    pub fn read(path: &Path) -> Result<Qrels> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Qrels::parse(&text, &path.display().to_string())
    }

    pub fn to_trec(&self) -> String {
        let mut out = String::new();
        for (q, docs) in &self.judgments {
            for (d, &r) in docs {
                out.push_str(&format!("{q} 0 {d} {}\n", u8::from(r)));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_query() {
        let q = Qrels::parse("q1 0 d1 1\nq1 0 d2 0\n\nq2 0 d1 2\n", "qrels").unwrap();
        assert!(q.is_relevant("q1", "d1"));
        assert!(!q.is_relevant("q1", "d2"));
        assert!(q.is_relevant("q2", "d1"));
        assert_eq!(q.num_relevant("q1"), 1);
        assert_eq!(q.num_relevant("q3"), 0);
        assert_eq!(Qrels::parse(&q.to_trec(), "x").unwrap().num_relevant("q2"), 1);
    }

    #[test]
    fn malformed_lines_are_reported() {
        let err = Qrels::parse("q1 0 d1 1\nq1 d2 1\n", "qrels.txt").unwrap_err();
        assert_eq!(err.to_string(), "qrels.txt:2: expected 4 fields, found 3");
        let err = Qrels::parse("q1 0 d1 yes\n", "qrels.txt").unwrap_err();
        assert!(err.to_string().starts_with("qrels.txt:1:"));
        let err = Qrels::parse("q1 0 d1 1\nq1 0 d1 0\n", "qrels.txt").unwrap_err();
        assert!(err.to_string().starts_with("qrels.txt:2:"));
    }
}
