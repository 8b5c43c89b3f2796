use std::path::PathBuf;

use meshqa_core::stats::{anova_factorial, cell_means};

use crate::error::{read_input, write_output, CliError, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// CSV with one column per factor and a response column.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "lod,qp,qt,ts,tq")]
    pub factors: Vec<String>,
    #[arg(long, default_value = "mos")]
    pub response: String,
    /// CSV copy of the effect table.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: Args) -> CliResult<()> {
    let bytes = read_input(&args.scores)?;
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("{}: no column `{name}`", args.scores.display())))
    };
    let factor_cols = args.factors.iter().map(|f| column(f)).collect::<CliResult<Vec<_>>>()?;
    let response_col = column(&args.response)?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let y: f64 = rec[response_col]
            .trim()
            .parse()
            .map_err(|_| CliError::Data(format!("row {}: `{}` is not a number", i + 2, &rec[response_col])))?;
        rows.push((factor_cols.iter().map(|&c| rec[c].trim().to_owned()).collect(), y));
    }
    let (levels, grid) = cell_means(&rows, factor_cols.len())?;
    let names: Vec<&str> = args.factors.iter().map(String::as_str).collect();
    let sizes: Vec<usize> = levels.iter().map(Vec::len).collect();
    let table = anova_factorial(&names, &sizes, &grid)?;
    if let Some(p) = &args.out {
        let mut csv = Vec::new();
        table.write_csv(&mut csv)?;
        write_output(p, csv)?;
    }
    print!("{}", table.to_text());
    Ok(())
}
