use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::correlation::plcc;
use super::StatsError;

pub const MIN_FIT_POINTS: usize = 8;
const RESTARTS: usize = 10;
const MAX_ITERATIONS: usize = 4000;

/// Four-parameter logistic `β2 + (β1 − β2) / (1 + exp(−(m − β3) / |β4|))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
}

impl LogisticParams {
    pub fn eval(&self, m: f64) -> f64 {
        self.beta2 + (self.beta1 - self.beta2) / (1.0 + (-(m - self.beta3) / self.beta4.abs()).exp())
    }

    fn from_vec(v: &[f64; 4]) -> Self {
        Self {
            beta1: v[0],
            beta2: v[1],
            beta3: v[2],
            beta4: v[3],
        }
    }
}

/// Minimizes `f` with the Nelder–Mead simplex method from `start` with initial edge lengths `step`.
pub fn nelder_mead<const N: usize>(f: impl Fn(&[f64; N]) -> f64, start: [f64; N], step: [f64; N], max_iter: usize, tol: f64) -> ([f64; N], f64) {
    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    simplex.push((start, f(&start)));
    for i in 0..N {
        let mut p = start;
        p[i] += step[i];
        simplex.push((p, f(&p)));
    }
    let combine = |a: &[f64; N], b: &[f64; N], t: f64| -> [f64; N] { std::array::from_fn(|i| a[i] + t * (b[i] - a[i])) };
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[N].1);
        if (worst - best).abs() <= tol * (best.abs() + tol) {
            break;
        }
        let centroid: [f64; N] = std::array::from_fn(|i| simplex[..N].iter().map(|p| p.0[i]).sum::<f64>() / N as f64);
        let w = simplex[N].0;
        let reflected = combine(&centroid, &w, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = combine(&centroid, &w, -2.0);
            let fe = f(&expanded);
            simplex[N] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[N - 1].1 {
            simplex[N] = (reflected, fr);
        } else {
            let (towards, ft) = if fr < worst { (reflected, fr) } else { (w, worst) };
            let contracted = combine(&centroid, &towards, 0.5);
            let fc = f(&contracted);
            if fc < ft {
                simplex[N] = (contracted, fc);
            } else {
                let b = simplex[0].0;
                for p in simplex.iter_mut().skip(1) {
                    p.0 = combine(&b, &p.0, 0.5);
                    p.1 = f(&p.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt()
}

pub fn sse(params: &LogisticParams, metric: &[f64], mos: &[f64]) -> f64 {
    metric.iter().zip(mos).map(|(&m, &y)| (params.eval(m) - y).powi(2)).sum()
}

/// Least-squares logistic fit from the data-driven start plus jittered restarts of `β3`, `β4`.
pub fn fit_logistic(metric: &[f64], mos: &[f64], seed: u64) -> Result<LogisticParams, StatsError> {
    if metric.len() != mos.len() {
        return Err(StatsError::Shape);
    }
    if metric.len() < MIN_FIT_POINTS {
        return Err(StatsError::TooFewPoints {
            needed: MIN_FIT_POINTS,
            got: metric.len(),
        });
    }
    let spread = std_dev(metric);
    if spread.is_nan() || spread <= 0.0 || !metric.iter().chain(mos).all(|v| v.is_finite()) {
        return Err(StatsError::DegenerateFit);
    }
    let hi = mos.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = mos.iter().cloned().fold(f64::INFINITY, f64::min);
    let mid = median(metric);
    let objective = |v: &[f64; 4]| {
        if v[3] == 0.0 {
            return f64::MAX;
        }
        let s = sse(&LogisticParams::from_vec(v), metric, mos);
        if s.is_finite() {
            s
        } else {
            f64::MAX
        }
    };
    let range = (hi - lo).max(1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<([f64; 4], f64)> = None;
    for r in 0..=RESTARTS {
        let (b3, b4) = if r == 0 {
            (mid, spread)
        } else {
            (mid + spread * rng.random_range(-1.0..1.0), spread * rng.random_range(0.2..3.0))
        };
        let mut start = [hi, lo, b3, b4];
        let mut cur = f64::MAX;
        // Restarting the simplex from its own optimum escapes premature collapse.
        for _ in 0..3 {
            let (p, v) = nelder_mead(objective, start, [0.1 * range, 0.1 * range, 0.5 * spread, 0.5 * spread], MAX_ITERATIONS, 1e-15);
            let done = v >= cur * (1.0 - 1e-12);
            start = p;
            cur = v;
            if done {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| cur < b.1) {
            best = Some((start, cur));
        }
    }
    let (p, _) = best.expect("at least one start");
    Ok(LogisticParams::from_vec(&p))
}

/// PLCC between MOS and the logistic-mapped metric.
pub fn plcc_after_logistic(metric: &[f64], mos: &[f64], seed: u64) -> Result<(f64, LogisticParams), StatsError> {
    let params = fit_logistic(metric, mos, seed)?;
    let mapped: Vec<f64> = metric.iter().map(|&m| params.eval(m)).collect();
    Ok((plcc(&mapped, mos)?, params))
}
