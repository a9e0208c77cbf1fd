//! Ranked document lists and the TREC run file format
//! (`query_id Q0 doc_id rank score run_tag`).

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc_id: String,
    /// 1-based.
    pub rank: usize,
    pub score: f64,
}

/// One query's ranked list. Ranks are dense `1..=n` in list order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRun {
    pub query_id: String,
    pub entries: Vec<RunEntry>,
}

impl RankedRun {
    /// Builds a run from `(doc_id, score)` pairs already in rank order.
    pub fn from_scored(query_id: impl Into<String>, docs: impl IntoIterator<Item = (String, f64)>) -> Self {
        let entries = docs
            .into_iter()
            .enumerate()
            .map(|(i, (doc_id, score))| RunEntry {
                doc_id,
                rank: i + 1,
                score,
            })
            .collect();
        RankedRun {
            query_id: query_id.into(),
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.doc_id.as_str())
    }
}

/// A tagged collection of per-query runs, kept sorted by query id.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSet {
    pub tag: String,
    pub queries: BTreeMap<String, RankedRun>,
}

impl RunSet {
    pub fn new(tag: impl Into<String>, runs: impl IntoIterator<Item = RankedRun>) -> Self {
        RunSet {
            tag: tag.into(),
            queries: runs.into_iter().map(|r| (r.query_id.clone(), r)).collect(),
        }
    }

    pub fn get(&self, query_id: &str) -> Option<&RankedRun> {
        self.queries.get(query_id)
    }

    pub fn to_trec(&self) -> String {
        let mut out = String::new();
        for run in self.queries.values() {
            for e in &run.entries {
                writeln!(
                    out,
                    "{} Q0 {} {} {:.6} {}",
                    run.query_id, e.doc_id, e.rank, e.score, self.tag
                )
                .expect("write to string");
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_trec()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<RunSet> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunSet::parse(&text, &path.display().to_string())
    }

    /// Parses a run file. Entries are ordered by their rank column; a run
    /// must use a single tag and ranks must be dense from 1.
    pub fn parse(text: &str, source: &str) -> Result<RunSet> {
        let mut tag: Option<String> = None;
        let mut per_query: BTreeMap<String, Vec<RunEntry>> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 6 {
                return Err(Error::format(
                    source,
                    lineno,
                    format!("expected 6 fields, found {}", fields.len()),
                ));
            }
            let rank: usize = fields[3]
                .parse()
                .map_err(|_| Error::format(source, lineno, format!("bad rank {:?}", fields[3])))?;
            let score: f64 = fields[4]
                .parse()
                .map_err(|_| Error::format(source, lineno, format!("bad score {:?}", fields[4])))?;
            match &tag {
                None => tag = Some(fields[5].to_string()),
                Some(t) if t != fields[5] => {
                    return Err(Error::format(
                        source,
                        lineno,
                        format!("mixed run tags {t:?} and {:?}", fields[5]),
                    ))
                }
                _ => {}
            }
            per_query.entry(fields[0].to_string()).or_default().push(RunEntry {
                doc_id: fields[2].to_string(),
                rank,
                score,
            });
        }

        let mut queries = BTreeMap::new();
        for (qid, mut entries) in per_query {
            entries.sort_by_key(|e| e.rank);
            let mut seen = HashSet::new();
            for (i, e) in entries.iter().enumerate() {
                if e.rank != i + 1 {
                    return Err(Error::format(
                        source,
                        0,
                        format!("query {qid}: ranks are not dense from 1"),
                    ));
                }
                if !seen.insert(e.doc_id.as_str()) {
                    return Err(Error::format(
                        source,
                        0,
                        format!("query {qid}: duplicate document {}", e.doc_id),
                    ));
                }
            }
            queries.insert(qid.clone(), RankedRun { query_id: qid, entries });
        }
        Ok(RunSet {
            tag: tag.unwrap_or_else(|| "run".to_string()),
            queries,
        })
    }
}
