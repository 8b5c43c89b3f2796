//! Pipeline configuration file.
//!
//! Plain text, one `key = value` per line, `#` starts a comment. Keys:
//!
//! | key | value | default |
//! |---|---|---|
//! | `assets` | corpus directory | none |
//! | `output` | output directory | none |
//! | `render_config` | render config file (`key = value`) | built-in defaults |
//! | `lod`, `qp`, `qt`, `ts`, `tq` | comma-separated level subsets | all levels |
//! | `epochs`, `learning_rate`, `constant_epochs` | training schedule | 10, 1e-4, 5 |
//! | `images_per_batch`, `patches_per_image` | batch shape | 4, 150 |
//! | `seed` | seed for every randomized step | 0 |
//!
//! Relative paths resolve against the directory of the config file.

use std::path::{Path, PathBuf};

use meshqa_core::distortion::{DistortionSpec, LOD_LEVELS, QP_LEVELS, QT_LEVELS, TQ_LEVELS, TS_LEVELS};
use meshqa_core::{RenderConfig, TrainConfig};

use crate::error::{read_text, CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSets {
    pub lod: Vec<u8>,
    pub qp: Vec<u8>,
    pub qt: Vec<u8>,
    pub ts: Vec<u32>,
    pub tq: Vec<u8>,
}

impl Default for LevelSets {
    fn default() -> Self {
        Self {
            lod: LOD_LEVELS.to_vec(),
            qp: QP_LEVELS.to_vec(),
            qt: QT_LEVELS.to_vec(),
            ts: TS_LEVELS.to_vec(),
            tq: TQ_LEVELS.to_vec(),
        }
    }
}

impl LevelSets {
    /// Every combination, lod outermost and JPEG quality innermost.
    pub fn specs(&self) -> CliResult<Vec<DistortionSpec>> {
        let mut out = Vec::new();
        for &lod in &self.lod {
            for &qp in &self.qp {
                for &qt in &self.qt {
                    for &ts in &self.ts {
                        for &tq in &self.tq {
                            out.push(DistortionSpec::new(lod, qp, qt, ts, tq)?);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.lod.len() * self.qp.len() * self.qt.len() * self.ts.len() * self.tq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub assets: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub render: RenderConfig,
    pub render_path: Option<PathBuf>,
    pub levels: LevelSets,
    pub train: TrainConfig,
    pub seed: u64,
}

fn list<T>(value: &str, allowed: &[T], key: &str) -> Result<Vec<T>, String>
where
    T: std::str::FromStr + PartialEq + Copy,
{
    let mut out: Vec<T> = Vec::new();
    for part in value.split(',').map(str::trim) {
        let v: T = part.parse().map_err(|_| format!("{key}: `{part}` is not a number"))?;
        if !allowed.contains(&v) {
            return Err(format!("{key}: `{part}` is not a known level"));
        }
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

impl PipelineConfig {
    pub fn parse(text: &str, base: &Path) -> CliResult<Self> {
        let mut cfg = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| CliError::Usage(format!("pipeline config line {}: {m}", i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let int = || value.parse::<usize>().map_err(|_| err(format!("{key}: expected an integer")));
            match key {
                "assets" => cfg.assets = Some(base.join(value)),
                "output" => cfg.output = Some(base.join(value)),
                "render_config" => cfg.render_path = Some(base.join(value)),
                "lod" => cfg.levels.lod = list(value, &LOD_LEVELS, key).map_err(err)?,
                "qp" => cfg.levels.qp = list(value, &QP_LEVELS, key).map_err(err)?,
                "qt" => cfg.levels.qt = list(value, &QT_LEVELS, key).map_err(err)?,
                "ts" => cfg.levels.ts = list(value, &TS_LEVELS, key).map_err(err)?,
                "tq" => cfg.levels.tq = list(value, &TQ_LEVELS, key).map_err(err)?,
                "epochs" => cfg.train.epochs = int()?,
                "constant_epochs" => cfg.train.constant_epochs = int()?,
                "images_per_batch" => cfg.train.images_per_batch = int()?,
                "patches_per_image" => cfg.train.patches_per_image = int()?,
                "learning_rate" => {
                    cfg.train.learning_rate = value.parse().map_err(|_| err("learning_rate: expected a number".into()))?
                }
                "seed" => cfg.seed = value.parse().map_err(|_| err("seed: expected an integer".into()))?,
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        cfg.validate()?;
        if let Some(p) = &cfg.render_path {
            cfg.render = RenderConfig::parse(&read_text(p)?).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&read_text(path)?, base)
    }

    /// Referenced input paths must exist; the training schedule must be usable.
    pub fn validate(&self) -> CliResult<()> {
        for p in self.assets.iter().chain(&self.render_path) {
            if !p.exists() {
                return Err(CliError::Usage(format!("{} does not exist", p.display())));
            }
        }
        self.train.validate().map_err(|e| CliError::Usage(e.to_string()))
    }
}
