use std::path::PathBuf;

use meshqa_core::stats::{mos_table, parse_votes_jsonl, screen_bt500, screen_golden, write_mos_csv, ScoreMatrix};

use crate::error::{read_text, write_output, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Vote export of the study server (JSON lines).
    #[arg(long)]
    pub votes: PathBuf,
    /// Cleaned MOS CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// File receiving the rejected participant ids, one per line.
    #[arg(long)]
    pub rejected: Option<PathBuf>,
    /// Skip the golden-unit rules (for exports without golden units).
    #[arg(long)]
    pub no_golden: bool,
}

pub fn run(args: Args) -> CliResult<()> {
    let votes = parse_votes_jsonl(&read_text(&args.votes)?)?;
    let matrix = ScoreMatrix::from_votes(&votes)?;
    let bt500 = screen_bt500(&matrix)?;
    let golden = if args.no_golden { Default::default() } else { screen_golden(&matrix)? };
    let rejected: std::collections::BTreeSet<usize> = bt500.union(&golden).copied().collect();
    eprintln!(
        "{} participants, {} stimuli; rejected {} (BT.500: {}, golden units: {})",
        matrix.participants.len(),
        matrix.stimuli.len(),
        rejected.len(),
        bt500.len(),
        golden.len()
    );
    for &p in &rejected {
        let why: Vec<&str> = [(bt500.contains(&p), "bt500"), (golden.contains(&p), "golden")]
            .into_iter()
            .filter_map(|(hit, name)| hit.then_some(name))
            .collect();
        eprintln!("rejected {} ({})", matrix.participants[p], why.join(", "));
    }
    if let Some(p) = &args.rejected {
        let ids: String = rejected.iter().map(|&p| format!("{}\n", matrix.participants[p])).collect();
        write_output(p, ids)?;
    }
    let records = mos_table(&matrix, &rejected)?;
    let mut csv = Vec::new();
    write_mos_csv(&mut csv, &records)?;
    match &args.out {
        Some(p) => write_output(p, csv),
        None => {
            print!("{}", String::from_utf8_lossy(&csv));
            Ok(())
        }
    }
}
