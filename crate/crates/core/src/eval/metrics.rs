use crate::error::{Error, Result};
use crate::eval::Qrels;
use crate::run::RankedRun;

/// Recall levels of the interpolated curve: 0.0, 0.1, ..., 1.0.
pub const RECALL_LEVELS: usize = 11;

fn judged<'a>(run: &'a RankedRun, qrels: &'a Qrels) -> Result<impl Iterator<Item = bool> + 'a> {
    if !qrels.has_query(&run.query_id) {
        return Err(Error::MissingQrels(run.query_id.clone()));
    }
    Ok(run.doc_ids().map(move |d| qrels.is_relevant(&run.query_id, d)))
}

/// Relevant documents in the top `k`, divided by `k` even when the run is
/// shorter than `k`.
pub fn precision_at_k(run: &RankedRun, qrels: &Qrels, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let hits = judged(run, qrels)?.take(k).filter(|&r| r).count();
    Ok(hits as f64 / k as f64)
}

/// Non-interpolated average precision over all `R` relevant documents;
/// relevant documents that were never retrieved contribute zero.
pub fn average_precision(run: &RankedRun, qrels: &Qrels) -> Result<f64> {
    let total = qrels.num_relevant(&run.query_id);
    let rels = judged(run, qrels)?;
    if total == 0 {
        return Err(Error::NoRelevant(run.query_id.clone()));
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, rel) in rels.enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / total as f64)
}

/// Interpolated precision at recall 0.0, 0.1, ..., 1.0: the best precision
/// at any cutoff whose recall reaches the level.
pub fn recall_precision_curve(run: &RankedRun, qrels: &Qrels) -> Result<[f64; RECALL_LEVELS]> {
    let total = qrels.num_relevant(&run.query_id);
    let rels = judged(run, qrels)?;
    if total == 0 {
        return Err(Error::NoRelevant(run.query_id.clone()));
    }
    // (hits, precision) at every relevant rank
    let mut points = Vec::new();
    let mut hits = 0usize;
    for (i, rel) in rels.enumerate() {
        if rel {
            hits += 1;
            points.push((hits, hits as f64 / (i + 1) as f64));
        }
    }
    let mut curve = [0.0; RECALL_LEVELS];
    for (level, slot) in curve.iter_mut().enumerate() {
        // recall hits/total >= level/10, compared in integers
        *slot = points
            .iter()
            .filter(|&&(h, _)| 10 * h >= level * total)
            .map(|&(_, p)| p)
            .fold(0.0, f64::max);
    }
    Ok(curve)
}
