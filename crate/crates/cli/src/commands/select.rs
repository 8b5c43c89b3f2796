use std::collections::BTreeMap;
use std::path::PathBuf;

use meshqa_core::stats::{read_candidates, select_stimuli};

use crate::error::{read_input, write_output, CliError, CliResult};
use crate::pipeline::PipelineConfig;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// CSV with columns `id,pseudo_mos_a,pseudo_mos_b,model_id,spec`.
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV (same columns, in selection order); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: Args, pipeline: &PipelineConfig) -> CliResult<()> {
    let seed = args.seed.unwrap_or(pipeline.seed);
    let candidates = read_candidates(read_input(&args.candidates)?.as_slice())?;
    if args.count == 0 || args.count > candidates.len() {
        return Err(CliError::Usage(format!("--count must be in 1..={}", candidates.len())));
    }
    let picked = select_stimuli(&candidates, args.count, seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "pseudo_mos_a", "pseudo_mos_b", "model_id", "spec"])?;
    let mut per_model: BTreeMap<&str, usize> = BTreeMap::new();
    for &i in &picked {
        let c = &candidates[i];
        *per_model.entry(&c.model_id).or_default() += 1;
        w.write_record([
            c.id.clone(),
            c.pseudo_mos_a.to_string(),
            c.pseudo_mos_b.to_string(),
            c.model_id.clone(),
            c.spec.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    let (lo, hi) = (per_model.values().min().unwrap_or(&0), per_model.values().max().unwrap_or(&0));
    eprintln!(
        "seed {seed}: selected {} of {} candidates, {} models with {lo}..={hi} stimuli each",
        picked.len(),
        candidates.len(),
        per_model.len()
    );
    match &args.out {
        Some(p) => write_output(p, bytes),
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}
