use std::path::{Path, PathBuf};

use meshqa_core::characterize::{characterize, normalize_corpus, write_scores_csv, SpectralResidual, ViewMode};

use super::render::{render_config, Views};
use super::{load_image, load_mesh, stem};
use crate::error::{write_output, CliError, CliResult};
use crate::pipeline::PipelineConfig;

const TEXTURE_EXTENSIONS: [&str; 4] = ["jpg", "jpeg", "ppm", "pgm"];

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory of `<id>.obj` models, each with a texture `<id>.jpg` (or `.jpeg`, `.ppm`).
    /// Defaults to the pipeline's `assets`.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// `main`, or `ring<N>` for the maximum over N ring viewpoints.
    #[arg(long, default_value = "main")]
    pub views: Views,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `(id, mesh, texture)` for every OBJ with a texture next to it, sorted by id.
pub fn corpus_entries(dir: &Path) -> CliResult<Vec<(String, PathBuf, PathBuf)>> {
    let read = std::fs::read_dir(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    let mut out = Vec::new();
    for entry in read {
        let path = entry.map_err(|e| CliError::data(dir.display(), e))?.path();
        if path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() != Some("obj") {
            continue;
        }
        let id = stem(&path);
        let texture = TEXTURE_EXTENSIONS.iter().map(|e| path.with_extension(e)).find(|p| p.is_file());
        match texture {
            Some(t) => out.push((id, path, t)),
            None => log::warn!("{}: no texture found, skipped", path.display()),
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(CliError::Data(format!("{}: no textured models", dir.display())));
    }
    Ok(out)
}

pub fn run(args: Args, pipeline: &PipelineConfig) -> CliResult<()> {
    let corpus = args
        .corpus
        .clone()
        .or_else(|| pipeline.assets.clone())
        .ok_or_else(|| CliError::Usage("--corpus is required without an `assets` pipeline key".into()))?;
    let config = render_config(args.config.as_ref(), pipeline)?;
    let mode = match args.views {
        Views::Main => ViewMode::Main,
        Views::Ring(n) => ViewMode::RingMax(n),
    };
    let saliency = SpectralResidual::default();
    let entries = corpus_entries(&corpus)?;
    let mut scores = Vec::with_capacity(entries.len());
    for (i, (id, mesh, texture)) in entries.iter().enumerate() {
        eprintln!("[{}/{}] {id}", i + 1, entries.len());
        let s = characterize(id, &load_mesh(mesh)?, &load_image(texture)?, &config, &saliency, mode)
            .map_err(|e| CliError::data(id, e))?;
        scores.push(s);
    }
    normalize_corpus(&mut scores);
    let mut csv = Vec::new();
    write_scores_csv(&mut csv, &scores)?;
    match &args.out {
        Some(p) => write_output(p, csv),
        None => {
            print!("{}", String::from_utf8_lossy(&csv));
            Ok(())
        }
    }
}
