use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::StatsError;

/// One row of an ANOVA table; `effect` is a factor name or `A×B`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectRow {
    pub effect: String,
    pub ss: f64,
    pub df: usize,
    pub f: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaTable {
    pub effects: Vec<EffectRow>,
    pub error_ss: f64,
    pub error_df: usize,
}

impl AnovaTable {
    pub fn effect(&self, name: &str) -> Option<&EffectRow> {
        self.effects.iter().find(|e| e.effect == name)
    }

    pub fn to_text(&self) -> String {
        let width = self.effects.iter().map(|e| e.effect.chars().count()).max().unwrap_or(6).max(6);
        let mut s = format!("{:<width$} {:>14} {:>6} {:>12} {:>12}\n", "effect", "SS", "df", "F", "p");
        for e in &self.effects {
            s += &format!("{:<width$} {:>14.6} {:>6} {:>12.4} {:>12.4e}\n", e.effect, e.ss, e.df, e.f, e.p);
        }
        s += &format!("{:<width$} {:>14.6} {:>6}\n", "error", self.error_ss, self.error_df);
        s
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.effects {
            w.serialize(e)?;
        }
        w.write_record(["error", &self.error_ss.to_string(), &self.error_df.to_string(), "", ""])?;
        w.flush()?;
        Ok(())
    }
}

/// Averages responses per cell and returns factor levels in sorted order with a dense
/// row-major response grid (last factor fastest).
pub fn cell_means(rows: &[(Vec<String>, f64)], factors: usize) -> Result<(Vec<Vec<String>>, Vec<f64>), StatsError> {
    let mut levels: Vec<Vec<String>> = vec![Vec::new(); factors];
    let mut cells: BTreeMap<Vec<String>, (f64, usize)> = BTreeMap::new();
    for (key, y) in rows {
        if key.len() != factors {
            return Err(StatsError::Shape);
        }
        for (l, k) in levels.iter_mut().zip(key) {
            if !l.contains(k) {
                l.push(k.clone());
            }
        }
        let c = cells.entry(key.clone()).or_insert((0.0, 0));
        c.0 += y;
        c.1 += 1;
    }
    for l in levels.iter_mut() {
        l.sort_by(|a, b| match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(y)) => x.total_cmp(&y),
            _ => a.cmp(b),
        });
    }
    let total: usize = levels.iter().map(|l| l.len()).product();
    if cells.len() != total {
        return Err(StatsError::IncompleteFactorial { cells: cells.len(), expected: total });
    }
    let mut grid = vec![0.0; total];
    for (key, (sum, n)) in cells {
        let mut idx = 0;
        for (l, k) in levels.iter().zip(&key) {
            idx = idx * l.len() + l.iter().position(|x| x == k).expect("level recorded");
        }
        grid[idx] = sum / n as f64;
    }
    Ok((levels, grid))
}

fn p_value(ss: f64, df: usize, mse: f64, error_df: usize) -> (f64, f64) {
    if ss <= 0.0 {
        return (0.0, 1.0);
    }
    let ms = ss / df as f64;
    if mse <= 0.0 {
        return (f64::INFINITY, 0.0);
    }
    let f = ms / mse;
    let dist = FisherSnedecor::new(df as f64, error_df as f64).expect("positive dof");
    (f, dist.sf(f))
}

/// Fixed-effects ANOVA on a complete factorial with one response per cell: all main effects
/// and pairwise interactions, with three-way and higher interactions pooled into the error.
///
/// `sizes` are the level counts; `response` is row-major with the last factor fastest.
pub fn anova_factorial(names: &[&str], sizes: &[usize], response: &[f64]) -> Result<AnovaTable, StatsError> {
    let k = sizes.len();
    if names.len() != k {
        return Err(StatsError::Shape);
    }
    let total: usize = sizes.iter().product();
    if response.len() != total || sizes.contains(&0) {
        return Err(StatsError::IncompleteFactorial {
            cells: response.len(),
            expected: total,
        });
    }
    let mut strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sizes[i + 1];
    }
    let level = |cell: usize, f: usize| (cell / strides[f]) % sizes[f];
    let n = total as f64;
    let grand = response.iter().sum::<f64>() / n;
    let mains: Vec<Vec<f64>> = (0..k)
        .map(|f| {
            let mut m = vec![0.0; sizes[f]];
            for (c, &y) in response.iter().enumerate() {
                m[level(c, f)] += y;
            }
            let per = n / sizes[f] as f64;
            m.iter().map(|s| s / per).collect()
        })
        .collect();
    let mut effects = Vec::new();
    let mut explained_ss = 0.0;
    let mut explained_df = 0;
    for f in 0..k {
        let per = n / sizes[f] as f64;
        let ss = mains[f].iter().map(|m| per * (m - grand).powi(2)).sum::<f64>();
        effects.push((names[f].to_string(), ss, sizes[f] - 1));
    }
    for a in 0..k {
        for b in a + 1..k {
            let mut m = vec![0.0; sizes[a] * sizes[b]];
            for (c, &y) in response.iter().enumerate() {
                m[level(c, a) * sizes[b] + level(c, b)] += y;
            }
            let per = n / (sizes[a] * sizes[b]) as f64;
            let mut ss = 0.0;
            for i in 0..sizes[a] {
                for j in 0..sizes[b] {
                    let cell = m[i * sizes[b] + j] / per;
                    ss += per * (cell - mains[a][i] - mains[b][j] + grand).powi(2);
                }
            }
            effects.push((format!("{}×{}", names[a], names[b]), ss, (sizes[a] - 1) * (sizes[b] - 1)));
        }
    }
    for (_, ss, df) in &effects {
        explained_ss += ss;
        explained_df += df;
    }
    let total_ss: f64 = response.iter().map(|y| (y - grand).powi(2)).sum();
    let error_df = (total - 1).checked_sub(explained_df).filter(|&d| d > 0).ok_or(StatsError::NoResidualDf)?;
    let error_ss = (total_ss - explained_ss).max(0.0);
    let mse = error_ss / error_df as f64;
    // Relative floor so that rounding residue does not count as signal.
    let floor = 1e-12 * total_ss.max(f64::MIN_POSITIVE);
    let effects = effects
        .into_iter()
        .map(|(effect, ss, df)| {
            let ss = if ss <= floor { 0.0 } else { ss };
            let mse = if error_ss <= floor { 0.0 } else { mse };
            let (f, p) = p_value(ss, df, mse, error_df);
            EffectRow { effect, ss, df, f, p }
        })
        .collect();
    Ok(AnovaTable {
        effects,
        error_ss,
        error_df,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_response() {
        let t = anova_factorial(&["a", "b", "c"], &[2, 3, 2], &[4.0; 12]).unwrap();
        assert!(t.effects.iter().all(|e| e.ss == 0.0 && e.p == 1.0));
        assert_eq!(t.effects.len(), 6);
        assert_eq!(t.error_df, 11 - 4 - 5);
    }

    #[test]
    fn sums_of_squares_partition_the_total() {
        let y: Vec<f64> = (0..27).map(|i| ((i * 7919) % 31) as f64 * 0.1).collect();
        let t = anova_factorial(&["a", "b", "c"], &[3, 3, 3], &y).unwrap();
        let g = y.iter().sum::<f64>() / 27.0;
        let total: f64 = y.iter().map(|v| (v - g).powi(2)).sum();
        let parts: f64 = t.effects.iter().map(|e| e.ss).sum::<f64>() + t.error_ss;
        assert!((parts - total).abs() < 1e-9);
        let df: usize = t.effects.iter().map(|e| e.df).sum::<usize>() + t.error_df;
        assert_eq!(df, 26);
    }

    #[test]
    fn main_effect_matches_hand_computation() {
        // Factor a adds 0 or 2; the rest is a fixed small pattern.
        let y: Vec<f64> = (0..8).map(|c| if c >= 4 { 2.0 } else { 0.0 } + [0.1, -0.3, 0.2, 0.0][c % 4]).collect();
        let t = anova_factorial(&["a", "b", "c"], &[2, 2, 2], &y).unwrap();
        let e = t.effect("a").unwrap();
        // Marginal means differ by 2: SS = 8 * 1^2.
        assert!((e.ss - 8.0).abs() < 1e-9);
        assert_eq!(e.df, 1);
    }

    #[test]
    fn cells_are_averaged_and_checked() {
        let rows = vec![
            (vec!["1".into(), "x".into()], 1.0),
            (vec!["1".into(), "x".into()], 3.0),
            (vec!["10".into(), "x".into()], 5.0),
            (vec!["2".into(), "x".into()], 7.0),
        ];
        let (levels, grid) = cell_means(&rows, 2).unwrap();
        assert_eq!(levels[0], vec!["1", "2", "10"]);
        assert_eq!(grid, vec![2.0, 7.0, 5.0]);
        let missing = vec![(vec!["1".into(), "x".into()], 1.0), (vec!["2".into(), "y".into()], 1.0)];
        assert!(matches!(cell_means(&missing, 2), Err(StatsError::IncompleteFactorial { .. })));
    }

    #[test]
    fn table_renders() {
        let y: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let t = anova_factorial(&["a", "b", "c"], &[2, 2, 2], &y).unwrap();
        assert!(t.to_text().contains("a×b"));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("effect,ss,df,f,p"));
    }
}
