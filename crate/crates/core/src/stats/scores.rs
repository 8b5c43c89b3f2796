use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::votes::ScoreMatrix;
use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosRecord {
    pub stimulus: String,
    pub mos: f64,
    /// Half-width of the 95% confidence interval.
    pub ci95: f64,
    /// Sample standard deviation of the votes (0 for a single vote).
    pub std: f64,
    pub n: usize,
}

/// Mean, sample std and Student-t 95% half-width; the half-width is 0 for one vote or zero spread.
pub fn mos_ci(stimulus: &str, scores: &[u8]) -> Result<MosRecord, StatsError> {
    if scores.is_empty() {
        return Err(StatsError::NoScores(stimulus.to_owned()));
    }
    let n = scores.len();
    let mean = scores.iter().map(|&s| s as f64).sum::<f64>() / n as f64;
    let std = if n > 1 {
        (scores.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let ci95 = if n == 1 || std == 0.0 {
        0.0
    } else {
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive dof").inverse_cdf(0.975);
        t * std / (n as f64).sqrt()
    };
    Ok(MosRecord {
        stimulus: stimulus.to_owned(),
        mos: mean,
        ci95,
        std,
        n,
    })
}

/// MOS records of every stimulus from the remaining participants.
pub fn mos_table(matrix: &ScoreMatrix, excluded: &BTreeSet<usize>) -> Result<Vec<MosRecord>, StatsError> {
    (0..matrix.stimuli.len())
        .map(|s| mos_ci(&matrix.stimuli[s], &matrix.column(s, excluded)))
        .collect()
}

pub fn write_mos_csv<W: std::io::Write>(out: W, records: &[MosRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
