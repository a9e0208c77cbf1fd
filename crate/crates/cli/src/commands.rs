use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use rayon::prelude::*;

use fcaclust::eval::{compare_runs, synth_corpus, Comparison};
use fcaclust::pipeline::{cluster_query, rank_query, run_experiment, ExperimentOutcome, RankMode};
use fcaclust::ranker::DEFAULT_RULES;
use fcaclust::text::{read_corpus, read_queries};
use fcaclust::{
    Automaton, Config, FcaConfig, FuzzyState, Index, PartitionRecord, PrecisionReport, Qrels, Query, RuleVector,
    RunSet, SynthSpec, TerminalKind,
};

use crate::{Cli, Command, FcaArgs, SynthArgs};

/// Initial state printed by `ca-demo` when no `--state` is given.
const DEMO_STATE: [f64; 4] = [0.8, 0.2, 0.2, 0.0];

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(usize::try_from(t).context("--threads")?);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .context("cannot start worker pool")?;
    pool.install(|| dispatch(cli.command, cfg))
}

fn dispatch(command: Command, mut cfg: Config) -> Result<()> {
    match command {
        Command::Index { corpus, out } => {
            let corpus = pick(corpus, &cfg.corpus, "--corpus", "corpus")?;
            let out = pick(out, &cfg.index, "--out", "index")?;
            let docs = read_corpus(&corpus)?;
            let index = Index::build(&docs)?;
            write_files(vec![(out, index.to_json())])?;
            eprintln!(
                "indexed {} documents, {} terms",
                index.num_docs(),
                index.vocabulary().len()
            );
        }
        Command::Search {
            index,
            queries,
            depth,
            out,
        } => {
            set_positive(&mut cfg.depth, depth, "--depth")?;
            let index = load_index(index, &cfg)?;
            let queries = load_queries(&index, queries, &cfg)?;
            let runs: Vec<_> = queries.par_iter().map(|q| index.retrieve_top_k(q, cfg.depth)).collect();
            write_files(vec![(out, RunSet::new("baseline", runs).to_trec())])?;
        }
        Command::Cluster {
            index,
            run,
            k,
            k_sweep,
            max_iters,
            out_dir,
        } => {
            let sweep = k_sweep.is_some();
            let ks = match k_sweep {
                Some(s) => parse_sweep(&s)?,
                None => {
                    set_positive(&mut cfg.k, k, "--k")?;
                    vec![cfg.k]
                }
            };
            if let Some(m) = max_iters {
                ensure!(m > 0, "--max-iters must be positive");
                cfg.lsc_max_iters = Some(m);
            }
            let out_dir = pick(out_dir, &cfg.output_dir, "--out-dir", "output_dir")?;
            let index = load_index(index, &cfg)?;
            let runs = RunSet::read(&run)?;
            for q in runs.queries.keys() {
                check_file_name(q)?;
            }
            let jobs: Vec<_> = ks
                .iter()
                .flat_map(|&k| runs.queries.values().map(move |r| (k, r)))
                .collect();
            let records = jobs
                .par_iter()
                .map(|&(k, r)| cluster_query(&index, r, k, cfg.seed, cfg.lsc_max_iters))
                .collect::<fcaclust::Result<Vec<_>>>()?;

            let mut files = Vec::with_capacity(records.len() + 1);
            let mut summary = String::from("query,k,energy,kmeans_energy,iterations,converged\n");
            for r in &records {
                let dir = if sweep {
                    out_dir.join(format!("k{}", r.k))
                } else {
                    out_dir.clone()
                };
                files.push((dir.join(format!("{}.json", r.query_id)), r.to_json()));
                let km = r.kmeans_energy.map_or(String::new(), |e| format!("{e:.6}"));
                writeln!(
                    summary,
                    "{},{},{:.6},{km},{},{}",
                    r.query_id, r.k, r.energy, r.iterations, r.converged
                )?;
            }
            files.push((out_dir.join("summary.csv"), summary));
            write_files(files)?;
        }
        Command::Rank {
            mode,
            partitions,
            index,
            queries,
            qrels,
            run,
            fca,
            out,
        } => {
            let mode: RankMode = mode.parse()?;
            if mode == RankMode::Baseline {
                let run = run.ok_or_else(|| anyhow!("--mode baseline needs --run"))?;
                let runs = RunSet::read(&run)?;
                write_files(vec![(out, runs.to_trec())])?;
                return Ok(());
            }
            let fca = fca_config(&mut cfg, &fca)?;
            let qrels = match mode {
                RankMode::Lq => {
                    let path =
                        pick(qrels, &cfg.qrels, "--qrels", "qrels").context("--mode lq needs relevance judgments")?;
                    Some(Qrels::read(&path)?)
                }
                _ => None,
            };
            let dir = pick(partitions, &cfg.output_dir, "--partitions", "output_dir")?;
            let index = load_index(index, &cfg)?;
            let queries = load_queries(&index, queries, &cfg)?;
            let records = queries
                .iter()
                .map(|q| {
                    check_file_name(&q.query_id)?;
                    let path = dir.join(format!("{}.json", q.query_id));
                    Ok(PartitionRecord::load(&path)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let runs = queries
                .par_iter()
                .zip(&records)
                .map(|(q, r)| rank_query(&index, r, q, mode, qrels.as_ref(), &fca))
                .collect::<fcaclust::Result<Vec<_>>>()?;
            write_files(vec![(out, RunSet::new(mode.tag(), runs).to_trec())])?;
        }
        Command::Eval { qrels, runs, out_dir } => {
            let qrels = Qrels::read(&pick(qrels, &cfg.qrels, "--qrels", "qrels")?)?;
            let out_dir = pick(out_dir, &cfg.output_dir, "--out-dir", "output_dir")?;
            let runs = runs.iter().map(|p| Ok(RunSet::read(p)?)).collect::<Result<Vec<_>>>()?;
            for (i, r) in runs.iter().enumerate() {
                if runs[..i].iter().any(|o| o.tag == r.tag) {
                    bail!("two runs share the tag {:?}", r.tag);
                }
            }
            let reports = runs
                .par_iter()
                .map(|r| PrecisionReport::evaluate(r, &qrels))
                .collect::<fcaclust::Result<Vec<_>>>()?;
            let comparisons = reports[1..]
                .iter()
                .map(|r| compare_runs(&reports[0], r))
                .collect::<fcaclust::Result<Vec<_>>>()?;

            let mut report_csv = String::from("run,query,metric,value\n");
            let mut curve_csv = String::from("run,recall,precision\n");
            for r in &reports {
                report_csv.extend(r.to_csv().lines().skip(1).map(|l| format!("{l}\n")));
                curve_csv.push_str(&r.curve_csv_rows());
            }
            let mut compare_csv = String::from(Comparison::CSV_HEADER);
            for c in &comparisons {
                compare_csv.push_str(&c.csv_rows());
            }
            write_files(vec![
                (out_dir.join("report.csv"), report_csv),
                (out_dir.join("curve.csv"), curve_csv),
                (out_dir.join("compare.csv"), compare_csv),
            ])?;
            for r in &reports {
                println!(
                    "{}\tMAP {:.4}\tP@10 {:.4}\tqueries {}",
                    r.tag,
                    r.map(),
                    r.mean.p10,
                    r.per_query.len()
                );
            }
        }
        Command::CaDemo {
            rules,
            state,
            max_steps,
        } => {
            let rules: RuleVector = rules.as_deref().unwrap_or(DEFAULT_RULES).parse()?;
            let cells = match state {
                Some(s) => parse_floats(&s)?,
                None if rules.len() == DEMO_STATE.len() => DEMO_STATE.to_vec(),
                None => bail!("--state is required for a rule vector of {} cells", rules.len()),
            };
            ensure!(
                cells.len() == rules.len(),
                "state has {} cells but the rule vector has {}",
                cells.len(),
                rules.len()
            );
            let steps = max_steps.unwrap_or(cfg.max_steps);
            ensure!(steps > 0, "--max-steps must be positive");
            let ca = Automaton::new(rules);
            let traj = ca.evolve(&FuzzyState::new(cells)?, steps)?;
            print!("{}", ca_demo_text(&ca, &traj));
        }
        Command::Synth { spec, out_dir } => {
            let spec = synth_spec(&spec, cfg.seed);
            let out_dir = pick(out_dir, &cfg.output_dir, "--out-dir", "output_dir")?;
            let corpus = synth_corpus(&spec)?;
            write_files(vec![
                (out_dir.join("corpus.tsv"), corpus.corpus_tsv()),
                (out_dir.join("queries.tsv"), corpus.queries_tsv()),
                (out_dir.join("qrels.txt"), corpus.qrels.to_trec()),
            ])?;
            eprintln!("{} documents, {} queries", corpus.documents.len(), corpus.queries.len());
        }
        Command::Experiment {
            spec,
            seeds,
            k,
            depth,
            max_iters,
            fca,
            out,
        } => {
            ensure!(seeds > 0, "--seeds must be positive");
            set_positive(&mut cfg.k, k, "--k")?;
            set_positive(&mut cfg.depth, depth, "--depth")?;
            if let Some(m) = max_iters {
                ensure!(m > 0, "--max-iters must be positive");
                cfg.lsc_max_iters = Some(m);
            }
            let fca = fca_config(&mut cfg, &fca)?;
            let base = synth_spec(&spec, cfg.seed);
            base.validate()?;
            let seeds: Vec<u64> = (0..seeds).map(|i| cfg.seed.wrapping_add(i)).collect();
            let outcomes = seeds
                .par_iter()
                .map(|&seed| {
                    let spec = SynthSpec { seed, ..base.clone() };
                    run_experiment(&spec, cfg.k, cfg.depth, &fca, cfg.lsc_max_iters)
                })
                .collect::<fcaclust::Result<Vec<_>>>()?;
            let csv = experiment_csv(&outcomes);
            let n = outcomes.len();
            let lq_base = outcomes.iter().filter(|o| o.map_lq >= o.map_baseline).count();
            let lq_lc = outcomes.iter().filter(|o| o.map_lq >= o.map_lc).count();
            match out {
                Some(path) => write_files(vec![(path, csv)])?,
                None => print!("{csv}"),
            }
            eprintln!("MAP(L_q) >= MAP(baseline) on {lq_base}/{n} seeds; MAP(L_q) >= MAP(L_c) on {lq_lc}/{n} seeds");
        }
    }
    Ok(())
}

pub fn experiment_csv(outcomes: &[ExperimentOutcome]) -> String {
    let mut csv = String::from(ExperimentOutcome::CSV_HEADER);
    for o in outcomes {
        csv.push_str(&o.csv_row());
    }
    csv
}

fn ca_demo_text(ca: &Automaton, traj: &fcaclust::Trajectory) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "rules: <{}>", ca.rules());
    let _ = writeln!(out, "dependency matrix:");
    let _ = write!(out, "{}", ca.matrix());
    let complemented: Vec<String> = ca
        .mask()
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(i, _)| i.to_string())
        .collect();
    let _ = writeln!(
        out,
        "complemented cells: {}",
        if complemented.is_empty() {
            "none".to_string()
        } else {
            complemented.join(",")
        }
    );
    // a repeat-terminated trajectory ends with a copy of an earlier state
    let shown = match traj.terminal_kind {
        TerminalKind::StepCap => traj.states.len(),
        _ => traj.states.len() - 1,
    };
    for (i, s) in traj.states[..shown].iter().enumerate() {
        let _ = writeln!(out, "P({i}) = {s}");
    }
    let first = traj.states.iter().position(|s| *s == traj.attractor).unwrap_or(0);
    let _ = match traj.terminal_kind {
        TerminalKind::FixedPoint => writeln!(out, "fixed point at P({first})"),
        TerminalKind::Cycle => writeln!(
            out,
            "cycle of period {} entered at P({first})",
            traj.period().unwrap_or(0)
        ),
        TerminalKind::StepCap => writeln!(out, "no repeat within {} steps", shown - 1),
    };
    out
}

fn pick(flag: Option<PathBuf>, config: &Option<PathBuf>, flag_name: &str, key: &str) -> Result<PathBuf> {
    flag.or_else(|| config.clone())
        .ok_or_else(|| anyhow!("missing {flag_name} (or config key `{key}`)"))
}

fn set_positive(slot: &mut usize, flag: Option<usize>, name: &str) -> Result<()> {
    if let Some(v) = flag {
        ensure!(v > 0, "{name} must be positive");
        *slot = v;
    }
    Ok(())
}

fn fca_config(cfg: &mut Config, args: &FcaArgs) -> Result<FcaConfig> {
    if let Some(r) = &args.rules {
        cfg.rules = r.parse()?;
    }
    set_positive(&mut cfg.cells, args.cells, "--cells")?;
    set_positive(&mut cfg.max_steps, args.max_steps, "--max-steps")?;
    Ok(cfg.fca())
}

fn synth_spec(args: &SynthArgs, seed: u64) -> SynthSpec {
    let d = SynthSpec::default();
    SynthSpec {
        topics: args.topics.unwrap_or(d.topics),
        docs_per_topic: args.docs_per_topic.unwrap_or(d.docs_per_topic),
        vocab_size: args.vocab_size.unwrap_or(d.vocab_size),
        concentration: args.concentration.unwrap_or(d.concentration),
        noise: args.noise.unwrap_or(d.noise),
        doc_len: args.doc_len.unwrap_or(d.doc_len),
        query_len: args.query_len.unwrap_or(d.query_len),
        seed,
    }
}

fn load_index(flag: Option<PathBuf>, cfg: &Config) -> Result<Index> {
    Ok(Index::load(&pick(flag, &cfg.index, "--index", "index")?)?)
}

fn load_queries(index: &Index, flag: Option<PathBuf>, cfg: &Config) -> Result<Vec<Query>> {
    let path = pick(flag, &cfg.queries, "--queries", "queries")?;
    let queries = read_queries(&path)?;
    ensure!(!queries.is_empty(), "{}: no queries", path.display());
    Ok(queries.into_iter().map(|(id, text)| index.query(id, text)).collect())
}

/// Parses `MIN..MAX` (inclusive) with `1 <= MIN <= MAX`.
pub fn parse_sweep(s: &str) -> Result<Vec<usize>> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| anyhow!("--k-sweep expects MIN..MAX, got {s:?}"))?;
    let lo: usize = lo.trim().parse().with_context(|| format!("--k-sweep {s:?}"))?;
    let hi: usize = hi.trim().parse().with_context(|| format!("--k-sweep {s:?}"))?;
    ensure!(lo >= 1 && lo <= hi, "--k-sweep needs 1 <= MIN <= MAX, got {s:?}");
    Ok((lo..=hi).collect())
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad cell value {v:?}")))
        .collect()
}

/// Query ids become file names; reject anything that would escape the
/// output directory.
fn check_file_name(id: &str) -> Result<()> {
    ensure!(
        !id.is_empty() && id != "." && id != ".." && !id.contains(['/', '\\']),
        "query id {id:?} cannot be used as a file name"
    );
    Ok(())
}

/// Writes every file after all contents have been computed; parent
/// directories are created as needed.
fn write_files(files: Vec<(PathBuf, String)>) -> Result<()> {
    for (path, _) in &files {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
    }
    for (path, text) in files {
        write_one(&path, &text)?;
    }
    Ok(())
}

fn write_one(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
