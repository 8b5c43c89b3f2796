//! Learned patch-based quality metric: deep features from a frozen extractor compared per
//! patch through a nonnegative bias-free head, pooled over the stimulus.

mod extractor;
mod model;
mod patches;
mod quality;
mod train;

pub use extractor::{AlexNetExtractor, ExtractorDescriptor, FeatureExtractor, IdentityExtractor, WeightSource, ALEXNET_ARCH};
pub use model::{extractor_for, head_distance, layer_errors, load_model, patch_distance, save_model, LayerErrors, QualityModel, NORM_EPS};
pub use patches::{patch_tensor, patchify, Patch, PatchSet, MIN_COVERAGE, PATCH_SIZE, PATCH_STRIDE};
pub use quality::{
    image_quality, image_quality_pooled, mos_from_quality, multiview_quality, patch_errors, pool, predict_mos,
    target_from_mos, PatchErrors, Pooling,
};
pub use train::{
    kfold_split, loss_and_gradient, prepare, read_dataset_manifest, train, train_prepared, DatasetRow, Fold, Head,
    ImageErrors, PreparedSample, TrainConfig, TrainReport, TrainSample,
};

/// Patches drawn per model in the view-independent mode.
pub const MULTIVIEW_PATCHES: usize = 300;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GlpipsError {
    #[error("image {width}x{height} is smaller than one patch")]
    ImageTooSmall { width: u32, height: u32 },
    #[error("no patch reaches the coverage threshold")]
    EmptyPatchSet,
    #[error("input shapes do not match")]
    ShapeMismatch,
    #[error("model file does not match its manifest: {0}")]
    ManifestMismatch(String),
    #[error("model digest mismatch")]
    DigestMismatch,
    #[error("empty training set")]
    EmptyDataset,
    #[error("loss became non-finite at epoch {epoch}, step {step}")]
    NonFiniteLoss { epoch: usize, step: usize },
    #[error("{models} models cannot form {folds} folds")]
    TooFewModels { models: usize, folds: usize },
    #[error("invalid training configuration")]
    InvalidConfig,
}
