use std::collections::{BTreeMap, BTreeSet};

use meshqa_core::fixtures::{planted_factorial, screening_panel, selection_candidates};
use meshqa_core::stats::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force AUC over all positive/negative pairs.
fn auc_brute(pos: &[f64], neg: &[f64]) -> f64 {
    let mut s = 0.0;
    for p in pos {
        for n in neg {
            s += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    s / (pos.len() * neg.len()) as f64
}

fn rec(mos: f64, std: f64, n: usize) -> MosRecord {
    MosRecord {
        stimulus: String::new(),
        mos,
        ci95: 0.0,
        std,
        n,
    }
}

#[test]
fn mann_whitney_matches_pair_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let pos: Vec<f64> = (0..rng.random_range(1..30)).map(|_| rng.random_range(0..8) as f64).collect();
        let neg: Vec<f64> = (0..rng.random_range(1..30)).map(|_| rng.random_range(0..8) as f64).collect();
        assert!((mann_whitney_auc(&pos, &neg).unwrap() - auc_brute(&pos, &neg)).abs() < 1e-12);
    }
}

#[test]
fn krasula_perfect_metric() {
    let recs: Vec<MosRecord> = (0..40).map(|i| rec(1.0 + 0.1 * i as f64, 0.5, 25)).collect();
    let metric: Vec<f64> = recs.iter().map(|r| r.mos).collect();
    let a = krasula_auc(&recs, &metric, true).unwrap();
    assert_eq!(a.auc_bw, 1.0);
    assert!(a.auc_ds > 0.9);
}

#[test]
fn krasula_independent_metric_is_chance() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let recs: Vec<MosRecord> = (0..200).map(|_| rec(rng.random_range(1.0..5.0), rng.random_range(0.5..1.2), 25)).collect();
    let metric: Vec<f64> = (0..200).map(|_| rng.random()).collect();
    let a = krasula_auc(&recs, &metric, true).unwrap();
    assert!((a.auc_bw - 0.5).abs() <= 0.05, "{a:?}");
    assert!((a.auc_ds - 0.5).abs() <= 0.05, "{a:?}");
}

#[test]
fn logistic_refit_within_one_percent() {
    let truth = LogisticParams {
        beta1: 4.8,
        beta2: 1.1,
        beta3: 0.3,
        beta4: 0.08,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let metric: Vec<f64> = (0..60).map(|_| rng.random_range(0.0..0.7)).collect();
    let mos: Vec<f64> = metric.iter().map(|&m| truth.eval(m)).collect();
    let fit = fit_logistic(&metric, &mos, 11).unwrap();
    assert!(sse(&fit, &metric, &mos) < 1e-6);
    for &m in &metric {
        assert!((fit.eval(m) / truth.eval(m) - 1.0).abs() <= 0.01);
    }
}

#[test]
fn logistic_never_lowers_plcc_on_noisy_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let metric: Vec<f64> = (0..80).map(|_| rng.random_range(0.0..1.0)).collect();
    let mos: Vec<f64> = metric.iter().map(|&m| 1.0 + 4.0 / (1.0 + (-(m - 0.5) / 0.1f64).exp()) + rng.random_range(-0.3..0.3)).collect();
    let raw = plcc(&metric, &mos).unwrap();
    let (fitted, _) = plcc_after_logistic(&metric, &mos, 0).unwrap();
    assert!(fitted >= raw, "{fitted} < {raw}");
}

#[test]
fn screening_finds_every_planted_participant() {
    let (m, planted) = screening_panel(24, 3);
    let bt = screen_bt500(&m).unwrap();
    let golden = screen_golden(&m).unwrap();
    let rejected: BTreeSet<usize> = bt.union(&golden).copied().collect();
    assert_eq!(rejected, planted);
    // Frozen statistics on the cleaned panel reject nobody.
    let stats = stimulus_stats(&m).unwrap();
    let cleaned = m.without(&rejected);
    assert!(screen_bt500_with(&cleaned, &stats).is_empty());
}

#[test]
fn one_outside_trial_is_kept() {
    // 10 raters agree on 30 stimuli except that every rater departs on exactly one.
    let mut scores = vec![vec![Some(3u8); 30]; 10];
    for (p, row) in scores.iter_mut().enumerate().skip(1) {
        row[p] = Some(4);
    }
    scores[0][5] = Some(1);
    let m = ScoreMatrix::new(
        (0..10).map(|p| p.to_string()).collect(),
        (0..30).map(|s| s.to_string()).collect(),
        scores,
        vec![GoldenScores::default(); 10],
    )
    .unwrap();
    assert!(screen_bt500(&m).unwrap().is_empty());
}

#[test]
fn selection_keeps_all_balances() {
    let cands = selection_candidates(50, 100, 1);
    let sel = select_stimuli(&cands, 500, 9).unwrap();
    assert_eq!(sel.len(), 500);
    assert_eq!(sel.iter().collect::<BTreeSet<_>>().len(), 500);
    let mut per_model: BTreeMap<&str, usize> = cands.iter().map(|c| (c.model_id.as_str(), 0)).collect();
    let mut levels = LEVEL_COUNTS.map(|n| vec![0usize; n]);
    let mut pivot = [0usize; PIVOT_RANGES];
    let lo = cands.iter().map(|c| c.pseudo_mos_a).fold(f64::INFINITY, f64::min);
    let hi = cands.iter().map(|c| c.pseudo_mos_a).fold(f64::NEG_INFINITY, f64::max);
    for &i in &sel {
        let c = &cands[i];
        *per_model.get_mut(c.model_id.as_str()).unwrap() += 1;
        for (d, l) in c.spec.level_indices().iter().enumerate() {
            levels[d][*l] += 1;
        }
        let r = (((c.pseudo_mos_a - lo) / (hi - lo) * 5.0) as usize).min(4);
        pivot[r] += 1;
    }
    let counts: Vec<usize> = per_model.values().copied().collect();
    assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
    for (d, l) in levels.iter().enumerate() {
        let u = 500.0 / LEVEL_COUNTS[d] as f64;
        assert!(l.iter().all(|&n| (n as f64 - u).abs() <= 0.1 * u), "dim {d}: {l:?}");
    }
    assert!(pivot.iter().all(|&n| (n as f64 - 100.0).abs() <= 15.0), "{pivot:?}");
}

#[test]
fn anova_detects_planted_interaction() {
    let y = planted_factorial(0.05, 4);
    let t = anova_factorial(&["lod", "qp", "qt", "ts", "tq"], &[10, 5, 5, 5, 5], &y).unwrap();
    assert!(t.effect("lod×qp").unwrap().p < 1e-6);
    assert!(t.effect("tq").unwrap().p > 0.05);
    assert_eq!(t.effects.len(), 15);
    assert_eq!(t.error_df, 6249 - (9 + 4 * 4) - (4 * 9 * 4 + 6 * 16));
}

#[test]
fn qp_only_response_ranks_qp_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let y: Vec<f64> = (0..625).map(|c| 4.0 - 0.5 * ((c / 25) % 5) as f64 + rng.random_range(-0.01..0.01)).collect();
    let t = anova_factorial(&["a", "qp", "b", "c"], &[5, 5, 5, 5], &y).unwrap();
    let best = t.effects.iter().max_by(|a, b| a.f.total_cmp(&b.f)).unwrap();
    assert_eq!(best.effect, "qp");
    assert!(best.p < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn srocc_ignores_increasing_transforms(x in prop::collection::vec(-10.0f64..10.0, 5..40), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = x.iter().map(|v| v + rng.random_range(-5.0..5.0)).collect();
        let Ok(base) = srocc(&x, &y) else { return Ok(()) };
        let tx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let ty: Vec<f64> = y.iter().map(|v| v * v * v + 3.0 * v).collect();
        prop_assert!((srocc(&tx, &ty).unwrap() - base).abs() < 1e-9);
    }

    #[test]
    fn auc_bw_flips_with_sign(mos in prop::collection::vec(1.0f64..5.0, 4..30), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let recs: Vec<MosRecord> = mos.iter().map(|&m| rec(m, 0.4, 20)).collect();
        let metric: Vec<f64> = recs.iter().map(|_| rng.random()).collect();
        let neg: Vec<f64> = metric.iter().map(|m| -m).collect();
        if let (Ok(a), Ok(b)) = (krasula_auc(&recs, &metric, true), krasula_auc(&recs, &neg, true)) {
            prop_assert!((a.auc_bw + b.auc_bw - 1.0).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a.auc_bw) && (0.0..=1.0).contains(&a.auc_ds));
            prop_assert_eq!(a.auc_ds, b.auc_ds);
        }
    }
}
