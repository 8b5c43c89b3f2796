use std::path::PathBuf;

use meshqa_core::glpips::{extractor_for, image_quality, load_model, mos_from_quality};

use super::{load_image, load_mask};
use crate::error::{read_input, CliError, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub model_file: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long = "dist")]
    pub distorted: PathBuf,
    /// Coverage mask (PGM, nonzero = covered); the whole image when absent.
    #[arg(long)]
    pub mask: Option<PathBuf>,
}

/// Pooled distance and predicted MOS of one pair.
pub fn score(args: &Args) -> CliResult<(f64, f64)> {
    let (model, bundled) =
        load_model(&read_input(&args.model_file)?).map_err(|e| CliError::data(args.model_file.display(), e))?;
    let extractor = extractor_for(&model, bundled)?;
    let reference = load_image(&args.reference)?;
    let distorted = load_image(&args.distorted)?;
    let mask = load_mask(args.mask.as_deref(), &reference)?;
    let q = image_quality(&reference, &distorted, &mask, extractor.as_ref(), &model)?;
    Ok((q, mos_from_quality(q)))
}

pub fn run(args: Args) -> CliResult<()> {
    let (q, mos) = score(&args)?;
    println!("Q̂ = {q:.6}");
    println!("MOS = {mos:.3}");
    Ok(())
}
