//! Query-specific document clustering with a fuzzy cellular automata
//! cluster ranker.
//!
//! The crate is organised along the processing pipeline:
//!
//! * [`text`]: tokenization, TF-IDF index and cosine retrieval.
//! * [`cluster`]: steepest-ascent local search over `E(P) = sum ||D_i||`.
//! * [`fca`]: hybrid null-boundary fuzzy cellular automata.
//! * [`ranker`]: oracle (L_q) and CA-distance (L_c) cluster orderings.
//! * [`eval`]: qrels, trec_eval-style metrics and synthetic collections.
//! * [`pipeline`]: the per-query glue used by the command line tool.

pub mod cluster;
pub mod config;
pub mod error;
pub mod eval;
pub mod fca;
pub mod pipeline;
pub mod ranker;
pub mod run;
pub mod text;
pub mod vector;

pub use cluster::{ClusterDoc, DocSet, LscOutcome, MoveCandidate, Partition, PartitionRecord};
pub use config::Config;
pub use error::{Error, Result};
pub use eval::{PrecisionReport, Qrels, SynthSpec};
pub use fca::{Automaton, FcaRule, FuzzyState, RuleVector, TerminalKind, Trajectory};
pub use ranker::{ClusterOrdering, FcaConfig, OrderingKind};
pub use run::{RankedRun, RunEntry, RunSet};
pub use text::{Document, Index, Query};
pub use vector::SparseVector;
