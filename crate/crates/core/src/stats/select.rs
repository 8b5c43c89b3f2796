use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::distortion::DistortionSpec;

/// Number of equal-width quality ranges along the pivot axis.
pub const PIVOT_RANGES: usize = 5;
/// Allowed relative deviation of per-level counts from uniform.
pub const LEVEL_TOLERANCE: f64 = 0.10;
/// Level counts per distortion dimension, in `DistortionSpec::level_indices` order.
pub const LEVEL_COUNTS: [usize; 5] = [10, 5, 5, 5, 5];
/// Feasible nearest neighbours considered when choosing for balance.
const NEAREST_SET: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    /// Pseudo-MOS from the pivot metric.
    pub pseudo_mos_a: f64,
    pub pseudo_mos_b: f64,
    pub model_id: String,
    pub spec: DistortionSpec,
}

/// Largest count a level may reach: uniform share plus the tolerance, at least one above it.
pub fn level_band(target: usize, levels: usize) -> (usize, usize) {
    let u = target as f64 / levels as f64;
    let tol = (LEVEL_TOLERANCE * u).max(1.0);
    (((u - tol).ceil().max(0.0)) as usize, (u + tol).floor() as usize)
}

struct State {
    model_of: Vec<usize>,
    model_counts: Vec<usize>,
    level_counts: [Vec<usize>; 5],
    level_caps: [usize; 5],
    levels: Vec<[usize; 5]>,
    uniform: [f64; 5],
}

impl State {
    fn feasible(&self, c: usize) -> bool {
        let min = *self.model_counts.iter().min().expect("at least one model");
        if self.model_counts[self.model_of[c]] != min {
            return false;
        }
        (0..5).all(|d| self.level_counts[d][self.levels[c][d]] < self.level_caps[d])
    }

    fn imbalance(&self, c: usize) -> f64 {
        (0..5).map(|d| self.level_counts[d][self.levels[c][d]] as f64 / self.uniform[d]).sum()
    }

    fn take(&mut self, c: usize) {
        self.model_counts[self.model_of[c]] += 1;
        for d in 0..5 {
            self.level_counts[d][self.levels[c][d]] += 1;
        }
    }
}

/// Index of the pivot range of value `a` within `[lo, hi]`.
pub fn pivot_range(a: f64, lo: f64, hi: f64) -> usize {
    if hi <= lo {
        return 0;
    }
    (((a - lo) / (hi - lo) * PIVOT_RANGES as f64) as usize).min(PIVOT_RANGES - 1)
}

/// Constrained sampling of the plane of two pseudo-MOS values.
///
/// The pivot axis is split into equal ranges that each receive an equal share of the
/// budget. Every range is covered by a regular grid of sample points visited in seeded
/// order, round-robin across ranges. For each point the nearest unchosen candidates of its
/// range that keep the balance constraints are collected and the one least represented on
/// the distortion levels is taken. A model may only gain a stimulus while it holds the
/// minimum count, so model counts never differ by more than one; level counts are capped at
/// the upper end of the tolerance band. Returns indices into `candidates` in selection order.
pub fn select_stimuli(candidates: &[Candidate], target: usize, seed: u64) -> Result<Vec<usize>, StatsError> {
    if target > candidates.len() {
        return Err(StatsError::InfeasibleConstraints(format!(
            "target {target} exceeds {} candidates",
            candidates.len()
        )));
    }
    if target == 0 {
        return Ok(Vec::new());
    }
    let mut model_index: BTreeMap<&str, usize> = BTreeMap::new();
    for c in candidates {
        let n = model_index.len();
        model_index.entry(&c.model_id).or_insert(n);
    }
    let lo_a = candidates.iter().map(|c| c.pseudo_mos_a).fold(f64::INFINITY, f64::min);
    let hi_a = candidates.iter().map(|c| c.pseudo_mos_a).fold(f64::NEG_INFINITY, f64::max);
    let lo_b = candidates.iter().map(|c| c.pseudo_mos_b).fold(f64::INFINITY, f64::min);
    let hi_b = candidates.iter().map(|c| c.pseudo_mos_b).fold(f64::NEG_INFINITY, f64::max);
    let mut state = State {
        model_of: candidates.iter().map(|c| model_index[c.model_id.as_str()]).collect(),
        model_counts: vec![0; model_index.len()],
        level_counts: LEVEL_COUNTS.map(|n| vec![0; n]),
        level_caps: LEVEL_COUNTS.map(|n| level_band(target, n).1),
        levels: candidates.iter().map(|c| c.spec.level_indices()).collect(),
        uniform: LEVEL_COUNTS.map(|n| target as f64 / n as f64),
    };

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); PIVOT_RANGES];
    for (i, c) in candidates.iter().enumerate() {
        members[pivot_range(c.pseudo_mos_a, lo_a, hi_a)].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (hi_a - lo_a) / PIVOT_RANGES as f64;
    let mut queues: Vec<std::collections::VecDeque<(f64, f64)>> = (0..PIVOT_RANGES)
        .map(|r| {
            let budget = target / PIVOT_RANGES + usize::from(r < target % PIVOT_RANGES);
            let side = (budget as f64).sqrt().ceil().max(1.0) as usize;
            let mut points: Vec<(f64, f64)> = (0..side * side)
                .map(|k| {
                    let (i, j) = (k % side, k / side);
                    let a = lo_a + width * (r as f64 + (i as f64 + 0.5) / side as f64);
                    let b = lo_b + (hi_b - lo_b) * (j as f64 + 0.5) / side as f64;
                    (a, b)
                })
                .collect();
            points.shuffle(&mut rng);
            points.truncate(budget);
            points.into()
        })
        .collect();
    for (r, q) in queues.iter().enumerate() {
        if q.len() > members[r].len() {
            return Err(StatsError::InfeasibleConstraints(format!(
                "pivot range {} holds {} candidates for a budget of {}",
                r + 1,
                members[r].len(),
                q.len()
            )));
        }
    }

    let mut chosen = vec![false; candidates.len()];
    let mut order = Vec::with_capacity(target);
    let mut stalled = 0;
    while order.len() < target {
        let mut progressed = false;
        for r in 0..PIVOT_RANGES {
            let Some((pa, pb)) = queues[r].pop_front() else { continue };
            let mut near: Vec<(f64, usize)> = members[r]
                .iter()
                .filter(|&&i| !chosen[i])
                .map(|&i| {
                    let c = &candidates[i];
                    ((c.pseudo_mos_a - pa).hypot(c.pseudo_mos_b - pb), i)
                })
                .collect();
            near.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let pick = near
                .iter()
                .map(|&(_, i)| i)
                .filter(|&i| state.feasible(i))
                .take(NEAREST_SET)
                .min_by(|&x, &y| state.imbalance(x).total_cmp(&state.imbalance(y)));
            match pick {
                Some(i) => {
                    chosen[i] = true;
                    state.take(i);
                    order.push(i);
                    progressed = true;
                }
                // Revisit the point after other ranges moved the counts.
                None => queues[r].push_back((pa, pb)),
            }
        }
        stalled = if progressed { 0 } else { stalled + 1 };
        if stalled > 1 {
            return Err(StatsError::InfeasibleConstraints(format!(
                "no candidate keeps model and level balance after {} of {target} picks",
                order.len()
            )));
        }
    }

    for (d, counts) in state.level_counts.iter().enumerate() {
        let (lo, hi) = level_band(target, LEVEL_COUNTS[d]);
        if let Some((level, &n)) = counts.iter().enumerate().find(|(_, &n)| n < lo || n > hi) {
            return Err(StatsError::InfeasibleConstraints(format!(
                "dimension {d} level {level} holds {n}, outside [{lo}, {hi}]"
            )));
        }
    }
    Ok(order)
}

pub fn read_candidates<R: std::io::Read>(input: R) -> Result<Vec<Candidate>, StatsError> {
    #[derive(Deserialize)]
    struct Row {
        id: String,
        pseudo_mos_a: f64,
        pseudo_mos_b: f64,
        model_id: String,
        spec: String,
    }
    csv::Reader::from_reader(input)
        .deserialize::<Row>()
        .map(|r| {
            let r = r.map_err(|e| StatsError::Parse(e.to_string()))?;
            let spec = r.spec.parse().map_err(|e: crate::distortion::DistortionError| StatsError::Parse(e.to_string()))?;
            Ok(Candidate {
                id: r.id,
                pseudo_mos_a: r.pseudo_mos_a,
                pseudo_mos_b: r.pseudo_mos_b,
                model_id: r.model_id,
                spec,
            })
        })
        .collect()
}
