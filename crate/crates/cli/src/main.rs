use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Query-specific document clustering with a fuzzy CA cluster ranker.
#[derive(Debug, Parser)]
#[command(name = "fcaclust", version)]
struct Cli {
    /// Flat `key = value` settings file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for per-query jobs (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a TF-IDF index from a corpus directory or TSV file.
    Index {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Index file to write (config key `index`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Retrieve the top documents for every query into a TREC run file.
    Search {
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        queries: Option<PathBuf>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster each query's retrieved set; one partition JSON per query.
    Cluster {
        #[arg(long)]
        index: Option<PathBuf>,
        /// Baseline run file produced by `search`.
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// Inclusive range `MIN..MAX`; writes one `k<K>` subdirectory per value.
        #[arg(long, value_name = "MIN..MAX", conflicts_with = "k")]
        k_sweep: Option<String>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Flatten cluster orderings into ranked runs.
    Rank {
        #[arg(long)]
        mode: String,
        /// Directory of partition files written by `cluster`.
        #[arg(long)]
        partitions: Option<PathBuf>,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Required for `--mode lq`.
        #[arg(long)]
        qrels: Option<PathBuf>,
        /// Search run passed through by `--mode baseline`.
        #[arg(long)]
        run: Option<PathBuf>,
        #[command(flatten)]
        fca: FcaArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score runs against qrels; the first run is the comparison baseline.
    Eval {
        #[arg(long)]
        qrels: Option<PathBuf>,
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print an automaton's dependency matrix and trajectory.
    CaDemo {
        #[arg(long)]
        rules: Option<String>,
        /// Comma-separated initial cell values in [0, 1].
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Generate a planted-topic corpus, queries and qrels.
    Synth {
        #[command(flatten)]
        spec: SynthArgs,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run baseline, L_q and L_c over consecutive synthetic-corpus seeds.
    Experiment {
        #[command(flatten)]
        spec: SynthArgs,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[command(flatten)]
        fca: FcaArgs,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct FcaArgs {
    #[arg(long)]
    rules: Option<String>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    docs_per_topic: Option<usize>,
    #[arg(long)]
    vocab_size: Option<usize>,
    #[arg(long)]
    concentration: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    doc_len: Option<usize>,
    #[arg(long)]
    query_len: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fcaclust: {e:#}");
            ExitCode::FAILURE
        }
    }
}
