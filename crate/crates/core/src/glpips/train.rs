use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extractor::{ExtractorDescriptor, FeatureExtractor};
use super::model::{LayerErrors, QualityModel};
use super::quality::{patch_errors, target_from_mos};
use super::GlpipsError;
use crate::asset::{CoverageMask, TextureImage};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample {
    pub reference: TextureImage,
    pub distorted: TextureImage,
    pub mask: CoverageMask,
    pub mos: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Images per batch.
    pub images_per_batch: usize,
    /// Patches drawn per image and epoch.
    pub patches_per_image: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Epochs at the initial rate before the linear decay to zero.
    pub constant_epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            images_per_batch: 4,
            patches_per_image: 150,
            epochs: 10,
            learning_rate: 1e-4,
            constant_epochs: 5,
            beta1: 0.5,
            beta2: 0.999,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), GlpipsError> {
        let ok = self.images_per_batch > 0
            && self.patches_per_image > 0
            && self.epochs > 0
            && self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2);
        if ok {
            Ok(())
        } else {
            Err(GlpipsError::InvalidConfig)
        }
    }

    /// Step size for a global step: constant for `constant_epochs`, then linear decay
    /// reaching zero after the last step.
    pub fn step_size(&self, step: usize, steps_per_epoch: usize) -> f64 {
        let hold = self.constant_epochs.min(self.epochs) * steps_per_epoch;
        let total = self.epochs * steps_per_epoch;
        if step < hold {
            self.learning_rate
        } else {
            self.learning_rate * (total - step) as f64 / (total - hold) as f64
        }
    }
}

/// Model head in double precision, used while optimizing.
#[derive(Debug, Clone, PartialEq)]
pub struct Head {
    pub omega: Vec<Vec<f64>>,
    pub omega0: Vec<f64>,
}

impl Head {
    pub fn from_model(m: &QualityModel) -> Self {
        Self {
            omega: m.omega.iter().map(|w| w.iter().map(|&v| v as f64).collect()).collect(),
            omega0: m.omega0.iter().map(|&v| v as f64).collect(),
        }
    }

    pub fn to_model(&self, extractor: ExtractorDescriptor) -> QualityModel {
        QualityModel {
            extractor,
            omega: self.omega.iter().map(|w| w.iter().map(|&v| v as f32).collect()).collect(),
            omega0: self.omega0.iter().map(|&v| v as f32).collect(),
        }
    }

    fn zeros_like(&self) -> Self {
        Self {
            omega: self.omega.iter().map(|w| vec![0.0; w.len()]).collect(),
            omega0: vec![0.0; self.omega0.len()],
        }
    }

    /// Flat parameter views: every `omega` entry in layer order, then `omega0`.
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.omega.iter_mut().flatten().chain(self.omega0.iter_mut())
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.omega.iter().flatten().chain(self.omega0.iter())
    }

    pub fn distance(&self, e: &LayerErrors) -> f64 {
        self.omega
            .iter()
            .zip(&self.omega0)
            .zip(e)
            .map(|((w, w0), e)| w0 * w.iter().zip(e).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }
}

/// One image in a batch: the mean layer errors over its drawn patches and its target.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageErrors {
    pub errors: LayerErrors,
    pub target: f64,
}

/// Batch loss `mean_I (Q_I - t_I)^2` and its gradient with respect to the head.
///
/// Because the head is linear in the patch errors, `Q_I` equals the head applied to the
/// mean patch errors of the image.
pub fn loss_and_gradient(head: &Head, batch: &[ImageErrors]) -> (f64, Head) {
    let mut grad = head.zeros_like();
    let n = batch.len() as f64;
    let mut loss = 0.0;
    for img in batch {
        let r = head.distance(&img.errors) - img.target;
        loss += r * r / n;
        let g = 2.0 * r / n;
        for (l, e) in img.errors.iter().enumerate() {
            let dot: f64 = head.omega[l].iter().zip(e).map(|(a, b)| a * b).sum();
            grad.omega0[l] += g * dot;
            for (c, &ec) in e.iter().enumerate() {
                grad.omega[l][c] += g * head.omega0[l] * ec;
            }
        }
    }
    (loss, grad)
}

/// A training pair with per-patch errors precomputed by the frozen extractor.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSample {
    pub patch_errors: Vec<LayerErrors>,
    pub target: f64,
}

pub fn prepare(dataset: &[TrainSample], extractor: &dyn FeatureExtractor) -> Result<Vec<PreparedSample>, GlpipsError> {
    dataset
        .par_iter()
        .map(|s| {
            if !(1.0..=5.0).contains(&s.mos) {
                return Err(GlpipsError::InvalidConfig);
            }
            let pe = patch_errors(&s.reference, &s.distorted, &s.mask, extractor)?;
            Ok(PreparedSample {
                patch_errors: pe.errors,
                target: target_from_mos(s.mos),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub model: QualityModel,
    /// Mean batch loss over each epoch, measured before each step.
    pub epoch_losses: Vec<f64>,
}

fn mean_errors(patches: &[LayerErrors], picks: &[usize]) -> LayerErrors {
    let n = picks.len() as f64;
    let mut acc: LayerErrors = patches[0].iter().map(|l| vec![0.0; l.len()]).collect();
    for &i in picks {
        for (a, e) in acc.iter_mut().zip(&patches[i]) {
            for (x, y) in a.iter_mut().zip(e) {
                *x += y;
            }
        }
    }
    for a in acc.iter_mut() {
        for x in a.iter_mut() {
            *x /= n;
        }
    }
    acc
}

/// Draws `n` patch indices: distinct when enough exist, uniformly with repetition otherwise.
fn draw_patches(rng: &mut ChaCha8Rng, available: usize, n: usize) -> Vec<usize> {
    if available >= n {
        sample(rng, available, n).into_vec()
    } else {
        (0..n).map(|_| rng.random_range(0..available)).collect()
    }
}

/// Optimizes the head from `initial` with Adam, projecting weights to `>= 0` after every step.
pub fn train_prepared(
    prepared: &[PreparedSample],
    initial: &QualityModel,
    config: &TrainConfig,
) -> Result<TrainReport, GlpipsError> {
    config.validate()?;
    if prepared.is_empty() {
        return Err(GlpipsError::EmptyDataset);
    }
    if prepared.iter().any(|p| p.patch_errors.is_empty()) {
        return Err(GlpipsError::EmptyPatchSet);
    }
    initial.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut head = Head::from_model(initial);
    let count = head.params().count();
    let (mut m, mut v) = (vec![0.0; count], vec![0.0; count]);
    let steps_per_epoch = prepared.len().div_ceil(config.images_per_batch);
    let mut step = 0usize;
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..prepared.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.images_per_batch) {
            let batch: Vec<ImageErrors> = chunk
                .iter()
                .map(|&i| {
                    let p = &prepared[i];
                    let picks = draw_patches(&mut rng, p.patch_errors.len(), config.patches_per_image);
                    ImageErrors {
                        errors: mean_errors(&p.patch_errors, &picks),
                        target: p.target,
                    }
                })
                .collect();
            let (loss, grad) = loss_and_gradient(&head, &batch);
            if !loss.is_finite() {
                return Err(GlpipsError::NonFiniteLoss { epoch, step });
            }
            total += loss;
            step += 1;
            let lr = config.step_size(step - 1, steps_per_epoch);
            let (b1, b2) = (config.beta1, config.beta2);
            let (c1, c2) = (1.0 - b1.powi(step as i32), 1.0 - b2.powi(step as i32));
            for (((p, g), mi), vi) in head.params_mut().zip(grad.params()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = b1 * *mi + (1.0 - b1) * g;
                *vi = b2 * *vi + (1.0 - b2) * g * g;
                *p -= lr * (*mi / c1) / ((*vi / c2).sqrt() + 1e-8);
                *p = p.max(0.0);
            }
        }
        let mean = total / steps_per_epoch as f64;
        log::info!("epoch {}: loss {mean:.6}", epoch + 1);
        epoch_losses.push(mean);
    }
    Ok(TrainReport {
        model: head.to_model(initial.extractor.clone()),
        epoch_losses,
    })
}

/// Precomputes patch errors and trains from [`QualityModel::initial`].
pub fn train(dataset: &[TrainSample], extractor: &dyn FeatureExtractor, config: &TrainConfig) -> Result<TrainReport, GlpipsError> {
    if dataset.is_empty() {
        return Err(GlpipsError::EmptyDataset);
    }
    let prepared = prepare(dataset, extractor)?;
    train_prepared(&prepared, &QualityModel::initial(extractor.descriptor()), config)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Splits distinct model ids into `k` folds; every id is tested exactly once and never
/// appears on both sides of a fold. Test-set sizes differ by at most one.
pub fn kfold_split(model_ids: &[String], k: usize, seed: u64) -> Result<Vec<Fold>, GlpipsError> {
    let mut ids: Vec<String> = model_ids.to_vec();
    ids.sort();
    ids.dedup();
    if k < 2 || k > ids.len() {
        return Err(GlpipsError::TooFewModels { models: ids.len(), folds: k });
    }
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = ids.len();
    Ok((0..k)
        .map(|f| {
            let (lo, hi) = (f * n / k, (f + 1) * n / k);
            let test = ids[lo..hi].to_vec();
            let train = ids[..lo].iter().chain(&ids[hi..]).cloned().collect();
            Fold { train, test }
        })
        .collect())
}

/// One row of a training manifest CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub ref_image_path: String,
    pub dist_image_path: String,
    pub mask_path: String,
    pub mos: f64,
    pub model_id: String,
    pub fold: Option<usize>,
}

pub fn read_dataset_manifest<R: std::io::Read>(input: R) -> csv::Result<Vec<DatasetRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
