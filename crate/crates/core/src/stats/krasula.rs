use serde::{Deserialize, Serialize};

use super::correlation::average_ranks;
use super::scores::MosRecord;
use super::StatsError;

/// Two-sided 95% critical value of the standard normal.
pub const Z_CRITICAL: f64 = 1.959_963_985;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrasulaAuc {
    /// Different-vs-similar separation.
    pub auc_ds: f64,
    /// Better-vs-worse classification over significantly different pairs.
    pub auc_bw: f64,
    pub different_pairs: usize,
    pub similar_pairs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialAuc {
    pub auc_ds: Option<f64>,
    pub auc_bw: Option<f64>,
    pub different_pairs: usize,
    pub similar_pairs: usize,
}

/// Two-sample z-test on the MOS difference using per-stimulus vote std and count.
pub fn significantly_different(a: &MosRecord, b: &MosRecord) -> bool {
    let se = (a.std * a.std / a.n as f64 + b.std * b.std / b.n as f64).sqrt();
    let diff = (a.mos - b.mos).abs();
    if se == 0.0 {
        return diff > 0.0;
    }
    diff / se > Z_CRITICAL
}

/// Rank-sum AUC: probability that a positive exceeds a negative, ties counted half.
pub fn mann_whitney_auc(positives: &[f64], negatives: &[f64]) -> Option<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return None;
    }
    let all: Vec<f64> = positives.iter().chain(negatives).cloned().collect();
    let ranks = average_ranks(&all);
    let (np, nn) = (positives.len() as f64, negatives.len() as f64);
    let rank_sum: f64 = ranks[..positives.len()].iter().sum();
    Some((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// Both AUCs over all unordered stimulus pairs. `higher_is_better` states the metric's
/// orientation: `false` for distances, where a lower value predicts higher quality.
pub fn krasula_auc(records: &[MosRecord], metric: &[f64], higher_is_better: bool) -> Result<KrasulaAuc, StatsError> {
    let p = krasula_partial(records, metric, higher_is_better)?;
    Ok(KrasulaAuc {
        auc_bw: p.auc_bw.ok_or(StatsError::NoSignificantPairs)?,
        auc_ds: p.auc_ds.ok_or(StatsError::NoSimilarPairs)?,
        different_pairs: p.different_pairs,
        similar_pairs: p.similar_pairs,
    })
}

/// Like [`krasula_auc`], but each AUC is `None` instead of an error when its pair set is empty.
pub fn krasula_partial(records: &[MosRecord], metric: &[f64], higher_is_better: bool) -> Result<PartialAuc, StatsError> {
    if records.len() != metric.len() {
        return Err(StatsError::Shape);
    }
    if records.len() < 2 {
        return Err(StatsError::TooFewPoints { needed: 2, got: records.len() });
    }
    let sign = if higher_is_better { 1.0 } else { -1.0 };
    let (mut diff_abs, mut sim_abs, mut better, mut worse) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..records.len() {
        for j in i + 1..records.len() {
            let d = metric[i] - metric[j];
            if significantly_different(&records[i], &records[j]) {
                diff_abs.push(d.abs());
                let oriented = if records[i].mos > records[j].mos { d } else { -d } * sign;
                better.push(oriented);
                worse.push(-oriented);
            } else {
                sim_abs.push(d.abs());
            }
        }
    }
    Ok(PartialAuc {
        auc_ds: mann_whitney_auc(&diff_abs, &sim_abs),
        auc_bw: mann_whitney_auc(&better, &worse),
        different_pairs: diff_abs.len(),
        similar_pairs: sim_abs.len(),
    })
}
