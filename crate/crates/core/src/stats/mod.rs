//! Subjective scores, participant screening, metric evaluation, factorial ANOVA and
//! stimulus selection.

mod anova;
mod correlation;
mod import;
mod krasula;
mod logistic;
mod scores;
mod screening;
mod select;
mod votes;

pub use anova::{anova_factorial, cell_means, AnovaTable, EffectRow};
pub use correlation::{average_ranks, plcc, srocc};
pub use import::import_external_metric;
pub use krasula::{krasula_auc, krasula_partial, mann_whitney_auc, significantly_different, KrasulaAuc, PartialAuc, Z_CRITICAL};
pub use logistic::{fit_logistic, nelder_mead, plcc_after_logistic, sse, LogisticParams, MIN_FIT_POINTS};
pub use scores::{mos_ci, mos_table, write_mos_csv, MosRecord};
pub use screening::{
    golden_rule, screen_bt500, screen_bt500_with, screen_golden, stimulus_stats, GoldenRule, StimulusStats, BT500_BALANCE,
    BT500_OUTSIDE_SHARE,
};
pub use select::{level_band, pivot_range, read_candidates, select_stimuli, Candidate, LEVEL_COUNTS, LEVEL_TOLERANCE, PIVOT_RANGES};
pub use votes::{parse_votes_jsonl, GoldenRole, GoldenScores, ScoreMatrix, VoteRecord};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("no scores for stimulus {0}")]
    NoScores(String),
    #[error("stimulus {0} has fewer than two votes")]
    InsufficientVotes(String),
    #[error("participant {0} lacks a golden-unit score")]
    MissingGoldenUnit(String),
    #[error("score outside 1..=5")]
    ScoreOutOfRange,
    #[error("input lengths or shapes disagree")]
    Shape,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("zero variance")]
    ZeroVariance,
    #[error("metric values are constant")]
    DegenerateFit,
    #[error("no significantly different pairs")]
    NoSignificantPairs,
    #[error("no similar pairs")]
    NoSimilarPairs,
    #[error("factorial has {cells} of {expected} cells")]
    IncompleteFactorial { cells: usize, expected: usize },
    #[error("no degrees of freedom left for the error term")]
    NoResidualDf,
    #[error("infeasible selection: {0}")]
    InfeasibleConstraints(String),
    #[error("unknown stimulus ids: {0:?}")]
    UnknownStimulus(Vec<String>),
    #[error("parse error: {0}")]
    Parse(String),
}
