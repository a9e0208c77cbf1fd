use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::eval::metrics::{average_precision, precision_at_k, recall_precision_curve, RECALL_LEVELS};
use crate::eval::Qrels;
use crate::run::RunSet;

/// Cutoffs reported as `P_<k>`.
const CUTOFFS: [usize; 3] = [5, 10, 20];

#[derive(Debug, Clone, PartialEq)]
pub struct QueryMetrics {
    pub p5: f64,
    pub p10: f64,
    pub p20: f64,
    pub ap: f64,
    pub curve: [f64; RECALL_LEVELS],
}

impl QueryMetrics {
    fn named(&self) -> [(&'static str, f64); 4] {
        [
            ("P_5", self.p5),
            ("P_10", self.p10),
            ("P_20", self.p20),
            ("map", self.ap),
        ]
    }
}

/// Per-query and macro-averaged scores of one run.
///
/// Like trec_eval's default, only queries present in both the run and the
/// judgments (with at least one relevant document) are scored.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionReport {
    pub tag: String,
    pub per_query: BTreeMap<String, QueryMetrics>,
    pub mean: QueryMetrics,
}

impl PrecisionReport {
    pub fn evaluate(runs: &RunSet, qrels: &Qrels) -> Result<PrecisionReport> {
        let mut per_query = BTreeMap::new();
        for (qid, run) in &runs.queries {
            if qrels.num_relevant(qid) == 0 {
                continue;
            }
            let [p5, p10, p20] = CUTOFFS.map(|k| precision_at_k(run, qrels, k));
            per_query.insert(
                qid.clone(),
                QueryMetrics {
                    p5: p5?,
                    p10: p10?,
                    p20: p20?,
                    ap: average_precision(run, qrels)?,
                    curve: recall_precision_curve(run, qrels)?,
                },
            );
        }
        if per_query.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "run {:?} shares no judged query with the qrels",
                runs.tag
            )));
        }
        let n = per_query.len() as f64;
        let avg = |f: fn(&QueryMetrics) -> f64| per_query.values().map(f).sum::<f64>() / n;
        let mut curve = [0.0; RECALL_LEVELS];
        for (i, slot) in curve.iter_mut().enumerate() {
            *slot = per_query.values().map(|m| m.curve[i]).sum::<f64>() / n;
        }
        let mean = QueryMetrics {
            p5: avg(|m| m.p5),
            p10: avg(|m| m.p10),
            p20: avg(|m| m.p20),
            ap: avg(|m| m.ap),
            curve,
        };
        Ok(PrecisionReport {
            tag: runs.tag.clone(),
            per_query,
            mean,
        })
    }

    pub fn map(&self) -> f64 {
        self.mean.ap
    }

    /// `run,query,metric,value` rows; the macro block uses query `all`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("run,query,metric,value\n");
        let rows = self
            .per_query
            .iter()
            .map(|(q, m)| (q.as_str(), m))
            .chain(std::iter::once(("all", &self.mean)));
        for (q, m) in rows {
            for (name, v) in m.named() {
                writeln!(out, "{},{q},{name},{v:.6}", self.tag).expect("write to string");
            }
        }
        out
    }

    /// Macro-averaged 11-point curve as `run,recall,precision` rows.
    pub fn curve_csv_rows(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.mean.curve.iter().enumerate() {
            writeln!(out, "{},{:.1},{p:.6}", self.tag, i as f64 / 10.0).expect("write to string");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricChange {
    pub metric: String,
    pub baseline: f64,
    pub value: f64,
    /// `(value - baseline) / baseline`; `None` when the baseline is zero.
    pub relative: Option<f64>,
}

/// Relative change of one run's report against a baseline report.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub baseline_tag: String,
    pub tag: String,
    pub changes: Vec<MetricChange>,
    /// Per-query AP wins / losses / ties of the run over the baseline.
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
}

pub fn compare_runs(baseline: &PrecisionReport, run: &PrecisionReport) -> Result<Comparison> {
    if !baseline.per_query.keys().eq(run.per_query.keys()) {
        let a: Vec<_> = baseline.per_query.keys().collect();
        let b: Vec<_> = run.per_query.keys().collect();
        return Err(Error::QuerySetMismatch(format!("{a:?} vs {b:?}")));
    }
    let mut changes: Vec<MetricChange> = baseline
        .mean
        .named()
        .iter()
        .zip(run.mean.named())
        .map(|(&(name, a), (_, b))| MetricChange {
            metric: name.to_string(),
            baseline: a,
            value: b,
            relative: (a != 0.0).then(|| (b - a) / a),
        })
        .collect();
    for i in 0..RECALL_LEVELS {
        let (a, b) = (baseline.mean.curve[i], run.mean.curve[i]);
        changes.push(MetricChange {
            metric: format!("iprec_at_recall_{:.1}", i as f64 / 10.0),
            baseline: a,
            value: b,
            relative: (a != 0.0).then(|| (b - a) / a),
        });
    }
    let (mut wins, mut losses, mut ties) = (0, 0, 0);
    for (q, m) in &run.per_query {
        let base = baseline.per_query[q].ap;
        match m.ap.partial_cmp(&base) {
            Some(std::cmp::Ordering::Greater) => wins += 1,
            Some(std::cmp::Ordering::Less) => losses += 1,
            _ => ties += 1,
        }
    }
    Ok(Comparison {
        baseline_tag: baseline.tag.clone(),
        tag: run.tag.clone(),
        changes,
        wins,
        losses,
        ties,
    })
}

impl Comparison {
    pub const CSV_HEADER: &'static str = "baseline,run,metric,baseline_value,run_value,relative_change\n";

    /// Rows without header. An undefined relative change is written as
    /// `undefined`; the AP win/loss/tie counts follow as three extra rows.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for c in &self.changes {
            let rel = c.relative.map_or("undefined".to_string(), |r| format!("{r:.6}"));
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{rel}",
                self.baseline_tag, self.tag, c.metric, c.baseline, c.value
            )
            .expect("write to string");
        }
        for (name, n) in [
            ("ap_wins", self.wins),
            ("ap_losses", self.losses),
            ("ap_ties", self.ties),
        ] {
            writeln!(out, "{},{},{name},,{n},", self.baseline_tag, self.tag).expect("write to string");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::RankedRun;

    fn qrels() -> Qrels {
        Qrels::parse("q1 0 a 1\nq1 0 b 1\nq2 0 c 1\n", "q").unwrap()
    }

    fn runs(tag: &str, q1: &[&str], q2: &[&str]) -> RunSet {
        let mk = |qid: &str, docs: &[&str]| {
            RankedRun::from_scored(qid, docs.iter().enumerate().map(|(i, d)| (d.to_string(), -(i as f64))))
        };
        RunSet::new(tag, vec![mk("q1", q1), mk("q2", q2)])
    }

    #[test]
    fn report_values() {
        let r = PrecisionReport::evaluate(&runs("t", &["a", "x", "b"], &["c"]), &qrels()).unwrap();
        assert!((r.per_query["q1"].ap - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(r.per_query["q2"].ap, 1.0);
        assert!((r.map() - (5.0 / 6.0 + 1.0) / 2.0).abs() < 1e-12);
        assert_eq!(r.per_query["q1"].p5, 0.4);
        let csv = r.to_csv();
        assert!(csv.starts_with("run,query,metric,value\nt,q1,P_5,0.400000\n"));
        assert!(csv.contains("t,all,map,0.916667\n"));
        assert_eq!(r.curve_csv_rows().lines().count(), 11);
    }

    #[test]
    fn comparisons() {
        let a = PrecisionReport::evaluate(&runs("a", &["a", "b"], &["c"]), &qrels()).unwrap();
        let same = compare_runs(&a, &a).unwrap();
        assert!(same.changes.iter().all(|c| c.relative == Some(0.0)));
        assert_eq!((same.wins, same.losses, same.ties), (0, 0, 2));

        let worse = PrecisionReport::evaluate(&runs("b", &["x", "a", "b"], &["y", "c"]), &qrels()).unwrap();
        let cmp = compare_runs(&worse, &a).unwrap();
        let map = cmp.changes.iter().find(|c| c.metric == "map").unwrap();
        let expected = (1.0 - worse.map()) / worse.map();
        assert!((map.relative.unwrap() - expected).abs() < 1e-12);
        assert_eq!(cmp.wins, 2);

        let mut zero = a.clone();
        zero.mean.p20 = 0.0;
        let cmp = compare_runs(&zero, &a).unwrap();
        assert_eq!(cmp.changes.iter().find(|c| c.metric == "P_20").unwrap().relative, None);
        assert!(cmp.csv_rows().contains(",P_20,0.000000,"));
        assert!(cmp.csv_rows().contains("undefined"));

        let q1_only = PrecisionReport::evaluate(
            &RunSet::new("c", vec![RankedRun::from_scored("q1", vec![("a".to_string(), 1.0)])]),
            &qrels(),
        )
        .unwrap();
        assert!(matches!(compare_runs(&a, &q1_only), Err(Error::QuerySetMismatch(_))));
    }

    #[test]
    fn relative_change_example() {
        let mut a = PrecisionReport::evaluate(&runs("a", &["a", "b"], &["c"]), &qrels()).unwrap();
        let mut b = a.clone();
        a.mean.ap = 0.20;
        b.mean.ap = 0.25;
        let cmp = compare_runs(&a, &b).unwrap();
        let map = cmp.changes.iter().find(|c| c.metric == "map").unwrap();
        assert!((map.relative.unwrap() - 0.25).abs() < 1e-12);
    }
}
