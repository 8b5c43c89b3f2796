use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use meshqa_core::glpips::{
    head_distance, kfold_split, mos_from_quality, prepare, read_dataset_manifest, save_model, train_prepared,
    AlexNetExtractor, DatasetRow, FeatureExtractor, PreparedSample, QualityModel, TrainConfig, TrainSample,
};
use meshqa_core::stats::{plcc, srocc};

use super::{load_image, load_mask, stem};
use crate::error::{create_dir, read_input, write_output, CliError, CliResult};
use crate::pipeline::PipelineConfig;

/// `seeded`, `seeded:<seed>` or `pretrained:<weight file>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtractorChoice {
    Seeded(Option<u64>),
    Pretrained(PathBuf),
}

impl FromStr for ExtractorChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "seeded" {
            return Ok(ExtractorChoice::Seeded(None));
        }
        if let Some(n) = s.strip_prefix("seeded:") {
            return n.parse().map(|n| ExtractorChoice::Seeded(Some(n))).map_err(|_| format!("bad seed in `{s}`"));
        }
        match s.strip_prefix("pretrained:") {
            Some(p) if !p.is_empty() => Ok(ExtractorChoice::Pretrained(p.into())),
            _ => Err(format!("expected `seeded`, `seeded:<n>` or `pretrained:<file>`, got `{s}`")),
        }
    }
}

impl ExtractorChoice {
    /// The extractor and, for imported weights, the copy to bundle into saved models.
    pub fn build(&self, seed: u64) -> CliResult<(AlexNetExtractor, bool)> {
        match self {
            ExtractorChoice::Seeded(s) => Ok((AlexNetExtractor::seeded(s.unwrap_or(seed)), false)),
            ExtractorChoice::Pretrained(p) => {
                let bytes = read_input(p)?;
                Ok((AlexNetExtractor::from_blob(&bytes).map_err(|e| CliError::data(p.display(), e))?, true))
            }
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// CSV with `ref_image_path,dist_image_path,mask_path,mos,model_id,fold`; paths are
    /// relative to the manifest. When every row has a fold, those folds are used.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value = "seeded")]
    pub extractor: ExtractorChoice,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for `model.bin`, `fold<k>.bin`, `predictions.csv` and `report.txt`.
    #[arg(long)]
    pub out: PathBuf,
}

pub(crate) fn load_samples(rows: &[DatasetRow], base: &Path) -> CliResult<Vec<TrainSample>> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            if (i + 1) % 100 == 0 {
                eprintln!("loaded {}/{}", i + 1, rows.len());
            }
            let reference = load_image(&base.join(&r.ref_image_path))?;
            let distorted = load_image(&base.join(&r.dist_image_path))?;
            let mask_path = (!r.mask_path.is_empty()).then(|| base.join(&r.mask_path));
            let mask = load_mask(mask_path.as_deref(), &reference)?;
            Ok(TrainSample {
                reference,
                distorted,
                mask,
                mos: r.mos,
            })
        })
        .collect()
}

/// Mean patch distance of one prepared image.
pub fn image_score(model: &QualityModel, p: &PreparedSample) -> f64 {
    p.patch_errors.iter().map(|e| head_distance(model, e)).sum::<f64>() / p.patch_errors.len() as f64
}

/// Test indices of each fold.
fn fold_members(rows: &[DatasetRow], k: usize, seed: u64) -> CliResult<Vec<Vec<usize>>> {
    if rows.iter().all(|r| r.fold.is_some()) {
        let mut by: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, r) in rows.iter().enumerate() {
            by.entry(r.fold.expect("checked")).or_default().push(i);
        }
        if by.len() < 2 {
            return Err(CliError::Data("manifest folds: need at least two distinct folds".into()));
        }
        return Ok(by.into_values().collect());
    }
    let ids: Vec<String> = rows.iter().map(|r| r.model_id.clone()).collect();
    let folds = kfold_split(&ids, k, seed)?;
    Ok(folds
        .iter()
        .map(|f| (0..rows.len()).filter(|&i| f.test.contains(&rows[i].model_id)).collect())
        .collect())
}

fn fmt_corr(r: Result<f64, meshqa_core::StatsError>) -> String {
    r.map(|v| format!("{v:.4}")).unwrap_or_else(|_| "n/a".into())
}

pub fn run(args: Args, pipeline: &PipelineConfig) -> CliResult<()> {
    let seed = args.seed.unwrap_or(pipeline.seed);
    let config = TrainConfig {
        seed,
        ..pipeline.train.clone()
    };
    let base = args.manifest.parent().unwrap_or(Path::new(".")).to_path_buf();
    let rows = read_dataset_manifest(read_input(&args.manifest)?.as_slice())?;
    if rows.is_empty() {
        return Err(CliError::Data(format!("{}: no rows", args.manifest.display())));
    }
    let (extractor, bundle) = args.extractor.build(seed)?;
    let bundled = bundle.then_some(&extractor);
    let samples = load_samples(&rows, &base)?;
    eprintln!("extracting features for {} pairs", samples.len());
    let prepared = prepare(&samples, &extractor).map_err(|e| CliError::data("feature extraction", e))?;
    drop(samples);
    let initial = QualityModel::initial(extractor.descriptor());
    let members = fold_members(&rows, args.folds, seed)?;
    create_dir(&args.out)?;

    let mut report = String::new();
    let _ = writeln!(report, "seed = {seed}");
    let _ = writeln!(report, "extractor = {:?}", extractor.descriptor().source);
    let _ = writeln!(
        report,
        "images_per_batch = {}, patches_per_image = {}, epochs = {}, learning_rate = {}, constant_epochs = {}, beta1 = {}, beta2 = {}",
        config.images_per_batch,
        config.patches_per_image,
        config.epochs,
        config.learning_rate,
        config.constant_epochs,
        config.beta1,
        config.beta2
    );
    let _ = writeln!(report, "fold  train  test  loss_first  loss_last  PLCC    SROCC");
    let mut predictions = csv::Writer::from_writer(Vec::new());
    predictions.write_record(["stimulus", "fold", "q_hat", "prediction", "mos"])?;
    for (f, test) in members.iter().enumerate() {
        let train: Vec<PreparedSample> =
            (0..rows.len()).filter(|i| !test.contains(i)).map(|i| prepared[i].clone()).collect();
        eprintln!("fold {f}: training on {} pairs", train.len());
        let rep = train_prepared(&train, &initial, &config)?;
        write_output(&args.out.join(format!("fold{f}.bin")), save_model(&rep.model, bundled)?)?;
        let (mut pred, mut mos) = (Vec::new(), Vec::new());
        for &i in test {
            let q = image_score(&rep.model, &prepared[i]);
            let p = mos_from_quality(q);
            predictions.write_record([
                stem(Path::new(&rows[i].dist_image_path)),
                f.to_string(),
                q.to_string(),
                p.to_string(),
                rows[i].mos.to_string(),
            ])?;
            pred.push(p);
            mos.push(rows[i].mos);
        }
        let _ = writeln!(
            report,
            "{f:<4}  {:<5}  {:<4}  {:<10.6}  {:<9.6}  {:<6}  {}",
            train.len(),
            test.len(),
            rep.epoch_losses.first().copied().unwrap_or(f64::NAN),
            rep.epoch_losses.last().copied().unwrap_or(f64::NAN),
            fmt_corr(plcc(&pred, &mos)),
            fmt_corr(srocc(&pred, &mos)),
        );
    }
    eprintln!("training the final model on all {} pairs", prepared.len());
    let full = train_prepared(&prepared, &initial, &config)?;
    write_output(&args.out.join("model.bin"), save_model(&full.model, bundled)?)?;
    let bytes = predictions.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    write_output(&args.out.join("predictions.csv"), bytes)?;
    write_output(&args.out.join("report.txt"), &report)?;
    print!("{report}");
    Ok(())
}
