use std::collections::BTreeSet;

use super::votes::ScoreMatrix;
use super::StatsError;

/// Share of a participant's trials that may fall outside `mean ± 2σ`.
pub const BT500_OUTSIDE_SHARE: f64 = 0.05;
/// Maximum `|P − Q| / (P + Q)` for outside trials to count as evenly distributed.
pub const BT500_BALANCE: f64 = 0.3;

/// Per-stimulus mean and sample standard deviation over all votes.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn stimulus_stats(matrix: &ScoreMatrix) -> Result<StimulusStats, StatsError> {
    let none = BTreeSet::new();
    let mut mean = Vec::with_capacity(matrix.stimuli.len());
    let mut std = Vec::with_capacity(matrix.stimuli.len());
    for s in 0..matrix.stimuli.len() {
        let col = matrix.column(s, &none);
        if col.len() < 2 {
            return Err(StatsError::InsufficientVotes(matrix.stimuli[s].clone()));
        }
        let n = col.len() as f64;
        let m = col.iter().map(|&v| v as f64).sum::<f64>() / n;
        let var = col.iter().map(|&v| (v as f64 - m).powi(2)).sum::<f64>() / (n - 1.0);
        mean.push(m);
        std.push(var.sqrt());
    }
    Ok(StimulusStats { mean, std })
}

/// Participants rejected by the outlier rule given fixed per-stimulus statistics.
pub fn screen_bt500_with(matrix: &ScoreMatrix, stats: &StimulusStats) -> BTreeSet<usize> {
    let mut rejected = BTreeSet::new();
    for (p, row) in matrix.scores.iter().enumerate() {
        let (mut trials, mut above, mut below) = (0usize, 0usize, 0usize);
        for (s, v) in row.iter().enumerate() {
            let Some(v) = *v else { continue };
            trials += 1;
            let d = v as f64 - stats.mean[s];
            if d.abs() > 2.0 * stats.std[s] {
                if d > 0.0 {
                    above += 1;
                } else {
                    below += 1;
                }
            }
        }
        let outside = above + below;
        if trials == 0 || outside == 0 {
            continue;
        }
        let share = outside as f64 / trials as f64;
        let balance = (above as f64 - below as f64).abs() / outside as f64;
        if share > BT500_OUTSIDE_SHARE && balance <= BT500_BALANCE {
            rejected.insert(p);
        }
    }
    rejected
}

/// Screening with statistics recomputed from the matrix.
pub fn screen_bt500(matrix: &ScoreMatrix) -> Result<BTreeSet<usize>, StatsError> {
    Ok(screen_bt500_with(matrix, &stimulus_stats(matrix)?))
}

/// Which golden-unit rule rejected a participant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoldenRule {
    PoorRatedHigh,
    HighRatedLow,
    RepeatsFarApart,
    BothMiddle,
    MiddleWithRepeatGap,
}

/// First rule that rejects the given golden scores, if any.
pub fn golden_rule(poor: u8, high: u8, rep1: u8, rep2: u8) -> Option<GoldenRule> {
    let gap = rep1.abs_diff(rep2);
    if poor >= 4 {
        Some(GoldenRule::PoorRatedHigh)
    } else if high <= 2 {
        Some(GoldenRule::HighRatedLow)
    } else if gap >= 3 {
        Some(GoldenRule::RepeatsFarApart)
    } else if poor == 3 && high == 3 {
        Some(GoldenRule::BothMiddle)
    } else if (high == 3 || poor == 3) && gap == 2 {
        Some(GoldenRule::MiddleWithRepeatGap)
    } else {
        None
    }
}

pub fn screen_golden(matrix: &ScoreMatrix) -> Result<BTreeSet<usize>, StatsError> {
    let mut rejected = BTreeSet::new();
    for (p, g) in matrix.golden.iter().enumerate() {
        let (Some(poor), Some(high), Some(r1), Some(r2)) = (g.poor, g.high, g.rep1, g.rep2) else {
            return Err(StatsError::MissingGoldenUnit(matrix.participants[p].clone()));
        };
        if golden_rule(poor, high, r1, r2).is_some() {
            rejected.insert(p);
        }
    }
    Ok(rejected)
}
