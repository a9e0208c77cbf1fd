//! Tokenization, TF-IDF indexing and cosine retrieval.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::run::RankedRun;
use crate::vector::{cosine, SparseVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            doc_id: doc_id.into(),
            text: text.into(),
        }
    }
}

/// Lowercases, splits on anything that is not alphanumeric and drops
/// single-character tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub term: String,
    pub id: u32,
    pub df: u32,
}

/// Terms sorted lexicographically; ids are dense in that order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    lookup: HashMap<String, u32>,
}

impl Vocabulary {
    fn from_entries(entries: Vec<VocabEntry>) -> Result<Self> {
        let mut lookup = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.id as usize != i || e.df == 0 {
                return Err(Error::InvalidArgument(format!("corrupt vocabulary entry {:?}", e.term)));
            }
            lookup.insert(e.term.clone(), e.id);
        }
        Ok(Vocabulary { entries, lookup })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.lookup.get(term).copied()
    }

    pub fn entry(&self, id: u32) -> &VocabEntry {
        &self.entries[id as usize]
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentVector {
    pub doc_id: String,
    /// Set when every term weight was zero; the vector is then empty.
    pub zero: bool,
    pub weights: SparseVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub query_id: String,
    pub text: String,
    pub vector: SparseVector,
}

/// Immutable TF-IDF index with unit-normalized document vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    vocabulary: Vocabulary,
    docs: Vec<DocumentVector>,
    by_id: HashMap<String, usize>,
}

fn term_counts(text: &str) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for t in tokenize(text) {
        *counts.entry(t).or_insert(0) += 1;
    }
    counts
}

impl Index {
    /// Weights are `tf * ln(N / df)` followed by unit normalization.
    pub fn build(docs: &[Document]) -> Result<Index> {
        if docs.is_empty() {
            return Err(Error::InvalidArgument("cannot index an empty corpus".into()));
        }
        let mut ids = HashSet::new();
        for d in docs {
            if d.doc_id.is_empty() {
                return Err(Error::InvalidArgument("empty document id".into()));
            }
            if !ids.insert(d.doc_id.as_str()) {
                return Err(Error::DuplicateId(d.doc_id.clone()));
            }
        }

        let counts: Vec<BTreeMap<String, u32>> = docs.iter().map(|d| term_counts(&d.text)).collect();
        let mut df: BTreeMap<&str, u32> = BTreeMap::new();
        for c in &counts {
            for term in c.keys() {
                *df.entry(term.as_str()).or_insert(0) += 1;
            }
        }
        let entries = df
            .iter()
            .enumerate()
            .map(|(i, (term, &df))| VocabEntry {
                term: term.to_string(),
                id: i as u32,
                df,
            })
            .collect();
        let vocabulary = Vocabulary::from_entries(entries)?;

        let n = docs.len();
        let vectors = docs
            .iter()
            .zip(&counts)
            .map(|(d, c)| {
                let raw = c
                    .iter()
                    .map(|(term, &tf)| {
                        let id = vocabulary.id(term).expect("term was counted");
                        (id, tf as f64 * idf(n, vocabulary.entry(id).df))
                    })
                    .collect();
                let weights = SparseVector::from_pairs(raw).normalized();
                DocumentVector {
                    doc_id: d.doc_id.clone(),
                    zero: weights.is_zero(),
                    weights,
                }
            })
            .collect();
        Index::from_parts(vocabulary, vectors)
    }

    fn from_parts(vocabulary: Vocabulary, docs: Vec<DocumentVector>) -> Result<Index> {
        let mut by_id = HashMap::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            if by_id.insert(d.doc_id.clone(), i).is_some() {
                return Err(Error::DuplicateId(d.doc_id.clone()));
            }
            if d.weights.min_dim() > vocabulary.len() {
                return Err(Error::InvalidArgument(format!(
                    "document {:?} uses unknown term ids",
                    d.doc_id
                )));
            }
        }
        Ok(Index {
            vocabulary,
            docs,
            by_id,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn documents(&self) -> &[DocumentVector] {
        &self.docs
    }

    pub fn document(&self, doc_id: &str) -> Option<&DocumentVector> {
        self.by_id.get(doc_id).map(|&i| &self.docs[i])
    }

    /// Vectorizes query text against this index; unknown terms are dropped.
    pub fn query(&self, query_id: impl Into<String>, text: impl Into<String>) -> Query {
        let text = text.into();
        let n = self.docs.len();
        let raw = term_counts(&text)
            .into_iter()
            .filter_map(|(term, tf)| {
                self.vocabulary
                    .id(&term)
                    .map(|id| (id, tf as f64 * idf(n, self.vocabulary.entry(id).df)))
            })
            .collect();
        Query {
            query_id: query_id.into(),
            text,
            vector: SparseVector::from_pairs(raw).normalized(),
        }
    }

    /// Top `k` documents by cosine with the query; ties by ascending doc id.
    pub fn retrieve_top_k(&self, query: &Query, k: usize) -> RankedRun {
        let mut scored: Vec<(&str, f64)> = self
            .docs
            .iter()
            .map(|d| (d.doc_id.as_str(), cosine(&query.vector, &d.weights)))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        scored.truncate(k.max(1));
        RankedRun::from_scored(
            query.query_id.clone(),
            scored.into_iter().map(|(id, s)| (id.to_string(), s)),
        )
    }

    pub fn to_json(&self) -> String {
        let file = IndexFile {
            format: INDEX_FORMAT.to_string(),
            num_docs: self.docs.len(),
            vocabulary: self.vocabulary.entries.clone(),
            documents: self.docs.clone(),
        };
        serde_json::to_string_pretty(&file).expect("index serializes")
    }

    pub fn from_json(text: &str) -> Result<Index> {
        let file: IndexFile = serde_json::from_str(text).map_err(|e| Error::Json {
            path: "<index>".into(),
            source: e,
        })?;
        Index::from_file(file)
    }

    fn from_file(file: IndexFile) -> Result<Index> {
        if file.format != INDEX_FORMAT {
            return Err(Error::InvalidArgument(format!(
                "unsupported index format {:?}",
                file.format
            )));
        }
        if file.num_docs != file.documents.len() {
            return Err(Error::InvalidArgument("document count does not match header".into()));
        }
        Index::from_parts(Vocabulary::from_entries(file.vocabulary)?, file.documents)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Index> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: IndexFile = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        Index::from_file(file)
    }
}

fn idf(n: usize, df: u32) -> f64 {
    (n as f64 / df as f64).ln()
}

const INDEX_FORMAT: &str = "fcaclust-index-v1";

/// On-disk index layout.
#[derive(Serialize, Deserialize)]
struct IndexFile {
    format: String,
    num_docs: usize,
    vocabulary: Vec<VocabEntry>,
    documents: Vec<DocumentVector>,
}

/// Reads a corpus: a directory of `.txt` files (id = file stem, sorted by
/// file name) or a single `doc_id<TAB>text` file.
pub fn read_corpus(path: &Path) -> Result<Vec<Document>> {
    if path.is_dir() {
        let mut files = Vec::new();
        for entry in std::fs::read_dir(path).map_err(|e| Error::io(path, e))? {
            let p = entry.map_err(|e| Error::io(path, e))?.path();
            if p.is_file() && p.extension().is_some_and(|x| x == "txt") {
                files.push(p);
            }
        }
        files.sort();
        if files.is_empty() {
            return Err(Error::InvalidArgument(format!("{}: no .txt documents", path.display())));
        }
        files
            .into_iter()
            .map(|p| {
                let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                let id = p.file_stem().expect("file has a name").to_string_lossy().into_owned();
                Ok(Document::new(id, text))
            })
            .collect()
    } else {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let docs = parse_tsv(&text, &path.display().to_string())?
            .into_iter()
            .map(|(id, text)| Document::new(id, text))
            .collect::<Vec<_>>();
        if docs.is_empty() {
            return Err(Error::InvalidArgument(format!("{}: no documents", path.display())));
        }
        Ok(docs)
    }
}

/// Reads `query_id<TAB>text` lines.
pub fn read_queries(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tsv(&text, &path.display().to_string())
}

pub fn parse_tsv(text: &str, source: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, body) = line
            .split_once('\t')
            .ok_or_else(|| Error::format(source, i + 1, "expected id<TAB>text"))?;
        let id = id.trim();
        if id.is_empty() || id.contains(char::is_whitespace) {
            return Err(Error::format(source, i + 1, format!("invalid id {id:?}")));
        }
        out.push((id.to_string(), body.to_string()));
    }
    Ok(out)
}
