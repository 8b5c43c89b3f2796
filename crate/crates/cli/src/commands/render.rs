use std::path::PathBuf;
use std::str::FromStr;

use meshqa_core::asset::encode_ppm;
use meshqa_core::render::{build_mipchain, render_with_mips, ring_viewpoints, Albedo};
use meshqa_core::{RenderConfig, Viewpoint};

use super::{load_image, load_mesh};
use crate::error::{create_dir, read_text, write_output, CliError, CliResult};
use crate::pipeline::PipelineConfig;

/// `main` or `ring<N>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Views {
    Main,
    Ring(usize),
}

impl FromStr for Views {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "main" {
            return Ok(Views::Main);
        }
        match s.strip_prefix("ring").map(str::parse::<usize>) {
            Some(Ok(n)) if n > 0 => Ok(Views::Ring(n)),
            _ => Err(format!("expected `main` or `ring<N>`, got `{s}`")),
        }
    }
}

impl Views {
    pub fn viewpoints(self, config: &RenderConfig) -> Vec<(String, Viewpoint)> {
        match self {
            Views::Main => vec![("main".into(), Viewpoint::main(config))],
            Views::Ring(n) => ring_viewpoints(n, config)
                .into_iter()
                .enumerate()
                .map(|(i, v)| (format!("ring{i}"), v))
                .collect(),
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub model: PathBuf,
    /// Required unless the config selects white albedo.
    #[arg(long)]
    pub texture: Option<PathBuf>,
    #[arg(long, default_value = "main")]
    pub viewpoint: Views,
    /// Render config (`key = value`); overrides the pipeline's `render_config`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub(crate) fn render_config(path: Option<&PathBuf>, pipeline: &PipelineConfig) -> CliResult<RenderConfig> {
    match path {
        Some(p) => RenderConfig::parse(&read_text(p)?).map_err(|e| CliError::data(p.display(), e)),
        None => Ok(pipeline.render.clone()),
    }
}

pub fn run(args: Args, pipeline: &PipelineConfig) -> CliResult<()> {
    let config = render_config(args.config.as_ref(), pipeline)?;
    let mesh = load_mesh(&args.model)?;
    let mips = match (&args.texture, config.albedo) {
        (Some(t), _) => Some(build_mipchain(&load_image(t)?)),
        (None, Albedo::White) => None,
        (None, Albedo::Texture) => return Err(CliError::Usage("--texture is required for textured renders".into())),
    };
    create_dir(&args.out)?;
    for (name, view) in args.viewpoint.viewpoints(&config) {
        let (image, mask) = render_with_mips(&mesh, mips.as_ref(), &config, &view)?;
        write_output(&args.out.join(format!("{name}.ppm")), encode_ppm(&image))?;
        write_output(&args.out.join(format!("{name}_mask.pgm")), encode_ppm(&mask.to_image()))?;
        println!("{name}: {} of {} pixels covered", mask.count(), image.width() * image.height());
    }
    Ok(())
}
