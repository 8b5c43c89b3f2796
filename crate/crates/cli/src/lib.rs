//! The `meshqa` command line: distortion generation, rendering, characterization, metric
//! training and evaluation, study analysis and the study server.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod error;
pub mod pipeline;

pub use error::{CliError, CliResult};
pub use pipeline::{LevelSets, PipelineConfig};

#[derive(Debug, Parser)]
#[command(name = "meshqa", version, about = "Textured mesh quality assessment pipeline")]
pub struct Cli {
    /// Print errors as JSON on stderr.
    #[arg(long, global = true)]
    pub json: bool,
    /// Pipeline config file (`key = value`).
    #[arg(long, global = true, value_name = "FILE")]
    pub pipeline: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply one or all distortion settings to a textured model.
    Distort(commands::distort::Args),
    /// Render a textured model to PPM frames plus PGM coverage masks.
    Render(commands::render::Args),
    /// Compute SI_Geo, SI_Col and VAC for every model of a corpus.
    Characterize(commands::characterize::Args),
    /// Pick a balanced subset of candidate stimuli.
    Select(commands::select::Args),
    /// Train the metric head with cross-validation.
    Train(commands::train::Args),
    /// Score one reference/distorted image pair.
    Predict(commands::predict::Args),
    /// Correlation and Krasula analysis of predictions against MOS.
    Eval(commands::eval::Args),
    /// Screen participants and write cleaned MOS.
    Screen(commands::screen::Args),
    /// Factorial ANOVA of scores over distortion parameters.
    Anova(commands::anova::Args),
    /// Run the study server.
    Serve(commands::serve::Args),
}

pub fn run(cli: Cli) -> CliResult<()> {
    let pipeline = match &cli.pipeline {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    match cli.command {
        Command::Distort(a) => commands::distort::run(a, &pipeline),
        Command::Render(a) => commands::render::run(a, &pipeline),
        Command::Characterize(a) => commands::characterize::run(a, &pipeline),
        Command::Select(a) => commands::select::run(a, &pipeline),
        Command::Train(a) => commands::train::run(a, &pipeline),
        Command::Predict(a) => commands::predict::run(a),
        Command::Eval(a) => commands::eval::run(a, &pipeline),
        Command::Screen(a) => commands::screen::run(a),
        Command::Anova(a) => commands::anova::run(a),
        Command::Serve(a) => commands::serve::run(a),
    }
}
