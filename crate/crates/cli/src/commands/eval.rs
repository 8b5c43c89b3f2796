use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::PathBuf;

use meshqa_core::stats::{krasula_partial, plcc, plcc_after_logistic, srocc, MosRecord};
use serde::Deserialize;

use crate::error::{read_input, write_output, CliError, CliResult};
use crate::pipeline::PipelineConfig;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// CSV with `stimulus,prediction` and an optional `fold` column.
    #[arg(long)]
    pub predictions: PathBuf,
    /// MOS CSV as written by `screen` (`stimulus,mos,ci95,std,n`).
    #[arg(long)]
    pub mos: PathBuf,
    /// The prediction is a distance: lower means better quality.
    #[arg(long)]
    pub lower_is_better: bool,
    /// Seed of the logistic-fit restarts.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct PredictionRow {
    stimulus: String,
    prediction: f64,
    #[serde(default)]
    fold: Option<String>,
}

/// One line of the evaluation table.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub fold: String,
    pub n: usize,
    pub plcc: Option<f64>,
    pub plcc_fit: Option<f64>,
    pub srocc: Option<f64>,
    pub auc_ds: Option<f64>,
    pub auc_bw: Option<f64>,
}

pub fn evaluate(fold: &str, records: &[MosRecord], pred: &[f64], higher_is_better: bool, seed: u64) -> EvalRow {
    let mos: Vec<f64> = records.iter().map(|r| r.mos).collect();
    let oriented: Vec<f64> = pred.iter().map(|&p| if higher_is_better { p } else { -p }).collect();
    let k = krasula_partial(records, pred, higher_is_better).ok();
    EvalRow {
        fold: fold.to_owned(),
        n: pred.len(),
        plcc: plcc(&oriented, &mos).ok(),
        plcc_fit: plcc_after_logistic(pred, &mos, seed).ok().map(|r| r.0),
        srocc: srocc(&oriented, &mos).ok(),
        auc_ds: k.and_then(|k| k.auc_ds),
        auc_bw: k.and_then(|k| k.auc_bw),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into())
}

pub fn table(rows: &[EvalRow], seed: u64) -> String {
    let mut s = format!("seed = {seed}\n");
    let _ = writeln!(s, "{:<8} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}", "fold", "n", "PLCC", "PLCC_fit", "SROCC", "AUC_DS", "AUC_BW");
    for r in rows {
        let _ = writeln!(
            s,
            "{:<8} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}",
            r.fold,
            r.n,
            cell(r.plcc),
            cell(r.plcc_fit),
            cell(r.srocc),
            cell(r.auc_ds),
            cell(r.auc_bw)
        );
    }
    s
}

pub fn run(args: Args, pipeline: &PipelineConfig) -> CliResult<()> {
    let seed = args.seed.unwrap_or(pipeline.seed);
    let mos: HashMap<String, MosRecord> = csv::Reader::from_reader(read_input(&args.mos)?.as_slice())
        .deserialize::<MosRecord>()
        .map(|r| r.map(|r| (r.stimulus.clone(), r)))
        .collect::<Result<_, _>>()?;
    let preds: Vec<PredictionRow> =
        csv::Reader::from_reader(read_input(&args.predictions)?.as_slice()).deserialize().collect::<Result<_, _>>()?;
    let missing: Vec<&str> = preds.iter().filter(|p| !mos.contains_key(&p.stimulus)).map(|p| p.stimulus.as_str()).collect();
    if !missing.is_empty() {
        return Err(CliError::Data(format!("no MOS for stimuli: {}", missing.join(", "))));
    }
    let mut groups: BTreeMap<String, (Vec<MosRecord>, Vec<f64>)> = BTreeMap::new();
    for p in &preds {
        if let Some(f) = &p.fold {
            let g = groups.entry(f.clone()).or_default();
            g.0.push(mos[&p.stimulus].clone());
            g.1.push(p.prediction);
        }
    }
    let hib = !args.lower_is_better;
    let mut rows: Vec<EvalRow> = groups.iter().map(|(f, (r, p))| evaluate(f, r, p, hib, seed)).collect();
    let all: Vec<MosRecord> = preds.iter().map(|p| mos[&p.stimulus].clone()).collect();
    let values: Vec<f64> = preds.iter().map(|p| p.prediction).collect();
    rows.push(evaluate("all", &all, &values, hib, seed));
    let text = table(&rows, seed);
    if let Some(p) = &args.out {
        write_output(p, &text)?;
    }
    print!("{text}");
    Ok(())
}
