use std::path::Path;

use meshqa_core::asset::{decode_image, parse_obj};
use meshqa_core::{CoverageMask, IndexedMesh, TextureImage};

use crate::error::{read_input, read_text, CliError, CliResult};

pub mod anova;
pub mod characterize;
pub mod distort;
pub mod eval;
pub mod predict;
pub mod render;
pub mod screen;
pub mod select;
pub mod serve;
pub mod train;

pub(crate) fn load_mesh(path: &Path) -> CliResult<IndexedMesh> {
    parse_obj(&read_text(path)?).map_err(|e| CliError::data(path.display(), e))
}

/// JPEG, binary PPM or binary PGM.
pub(crate) fn load_image(path: &Path) -> CliResult<TextureImage> {
    decode_image(&read_input(path)?).map_err(|e| CliError::data(path.display(), e))
}

pub(crate) fn load_mask(path: Option<&Path>, image: &TextureImage) -> CliResult<CoverageMask> {
    let Some(path) = path else {
        return Ok(CoverageMask::full(image.width(), image.height()));
    };
    let mask = CoverageMask::from_image(&load_image(path)?);
    if !mask.matches(image) {
        return Err(CliError::Data(format!("{}: mask size differs from the image", path.display())));
    }
    Ok(mask)
}

pub(crate) fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
