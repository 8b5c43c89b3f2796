use std::path::Path;

use serde_json::json;

/// Failure of a subcommand. Usage errors exit with 1, data errors with 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.kind(), "code": self.exit_code(), "message": self.to_string() }).to_string()
    }

    pub fn data(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        CliError::Data(format!("{context}: {e}"))
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        })*
    };
}

data_error!(
    meshqa_core::AssetError,
    meshqa_core::DistortionError,
    meshqa_core::RenderError,
    meshqa_core::GlpipsError,
    meshqa_core::StatsError,
    meshqa_core::characterize::CharacterizeError,
    meshqa_study::StudyError,
    csv::Error,
    serde_json::Error
);

pub type CliResult<T> = Result<T, CliError>;

/// Reads an input file. A missing file is a usage error; anything else is a data error.
pub fn read_input(path: &Path) -> CliResult<Vec<u8>> {
    match std::fs::read(path) {
        Ok(b) => Ok(b),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(CliError::Usage(format!("{}: no such file", path.display())))
        }
        Err(e) => Err(CliError::data(path.display(), e)),
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    String::from_utf8(read_input(path)?).map_err(|e| CliError::data(path.display(), e))
}

pub fn write_output(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::data(dir.display(), e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::data(path.display(), e))
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::data(path.display(), e))
}
