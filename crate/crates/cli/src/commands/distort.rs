use std::io::Write;
use std::path::{Path, PathBuf};

use meshqa_core::asset::write_obj;
use meshqa_core::distortion::{apply_hrc, mesh_variants, texture_variants, SizeReport};
use meshqa_core::{DistortionSpec, ManifestRow};

use super::{load_image, load_mesh, stem};
use crate::error::{create_dir, write_output, CliError, CliResult};
use crate::pipeline::PipelineConfig;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub texture: PathBuf,
    /// One setting as `L<lod>,<qp>,<qt>,<ts>,<tq>`.
    #[arg(long, conflicts_with = "all", required_unless_present = "all")]
    pub spec: Option<DistortionSpec>,
    /// Every combination of the configured level sets.
    #[arg(long)]
    pub all: bool,
    /// Output directory; `manifest.jsonl` is written there.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Model id recorded in the manifest; defaults to the OBJ file stem.
    #[arg(long)]
    pub model_id: Option<String>,
}

fn manifest_line(row: &ManifestRow) -> String {
    serde_json::to_string(row).expect("plain data") + "\n"
}

fn rel(out: &Path, p: &Path) -> String {
    p.strip_prefix(out).unwrap_or(p).to_string_lossy().replace('\\', "/")
}

pub fn run(args: Args, pipeline: &PipelineConfig) -> CliResult<()> {
    let out = args
        .out
        .clone()
        .or_else(|| pipeline.output.clone())
        .ok_or_else(|| CliError::Usage("--out is required without an `output` pipeline key".into()))?;
    let model_id = args.model_id.clone().unwrap_or_else(|| stem(&args.model));
    let mesh = load_mesh(&args.model)?;
    let texture = load_image(&args.texture)?;
    create_dir(&out)?;
    let mut manifest = String::new();
    if let Some(spec) = args.spec {
        let hrc = apply_hrc(&mesh, &texture, spec)?;
        let mesh_path = out.join(format!("{}.obj", spec.tag()));
        let tex_path = out.join(format!("{}.jpg", spec.tag()));
        write_output(&mesh_path, write_obj(&hrc.mesh))?;
        write_output(&tex_path, &hrc.jpeg)?;
        manifest.push_str(&manifest_line(&ManifestRow::new(
            &model_id,
            spec,
            hrc.size,
            rel(&out, &mesh_path),
            rel(&out, &tex_path),
        )));
    } else {
        let levels = &pipeline.levels;
        if levels.is_empty() {
            return Err(CliError::Usage("empty level set".into()));
        }
        let mut meshes = mesh_variants(&mesh, &levels.qp, &levels.qt)?;
        meshes.retain(|m| levels.lod.contains(&m.lod));
        let textures = texture_variants(&texture, &levels.ts, &levels.tq)?;
        let (mesh_dir, tex_dir) = (out.join("mesh"), out.join("texture"));
        create_dir(&mesh_dir)?;
        create_dir(&tex_dir)?;
        let mut mesh_entries = Vec::with_capacity(meshes.len());
        for m in &meshes {
            let p = mesh_dir.join(format!("L{}_qp{}_qt{}.obj", m.lod, m.qp, m.qt));
            write_output(&p, write_obj(&m.mesh))?;
            mesh_entries.push(((m.lod, m.qp, m.qt), m.mesh_bytes, rel(&out, &p)));
        }
        let mut tex_entries = Vec::with_capacity(textures.len());
        for t in &textures {
            let p = tex_dir.join(format!("ts{}_tq{}.jpg", t.ts, t.tq));
            write_output(&p, &t.jpeg)?;
            tex_entries.push(((t.ts, t.tq), t.jpeg.len() as u64, rel(&out, &p)));
        }
        for spec in levels.specs()? {
            let (_, mesh_bytes, mesh_path) = mesh_entries
                .iter()
                .find(|e| e.0 == (spec.lod, spec.qp, spec.qt))
                .expect("every mesh variant generated");
            let (_, tex_bytes, tex_path) =
                tex_entries.iter().find(|e| e.0 == (spec.ts, spec.tq)).expect("every texture variant generated");
            let size = SizeReport::new(*tex_bytes, *mesh_bytes);
            manifest.push_str(&manifest_line(&ManifestRow::new(
                &model_id,
                spec,
                size,
                mesh_path.clone(),
                tex_path.clone(),
            )));
        }
    }
    write_output(&out.join("manifest.jsonl"), &manifest)?;
    let rows = manifest.lines().count();
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{rows} manifest rows written to {}", out.join("manifest.jsonl").display());
    Ok(())
}
