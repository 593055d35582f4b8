use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("cannot decode {}: {reason}", path.display())]
    Decode { path: PathBuf, reason: String },

    #[error("image is {height}x{width}; both dimensions must be at least 2")]
    DegenerateImage { height: usize, width: usize },

    #[error("point label at ({row}, {col}) is outside the {height}x{width} image")]
    OutOfBounds {
        row: usize,
        col: usize,
        height: usize,
        width: usize,
    },

    #[error("class id {class_id} is invalid for {num_classes} classes")]
    BadClass { class_id: u32, num_classes: usize },

    #[error("label file contains no point labels")]
    EmptyLabelSet,

    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("feature file has bad magic bytes {0:?}")]
    BadMagic([u8; 4]),

    #[error("feature file truncated: expected {expected} bytes, found {found}")]
    TruncatedFile { expected: u64, found: u64 },

    #[error("unsupported feature file version {0}")]
    UnsupportedVersion(u32),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("all feature vectors are zero; cannot normalize")]
    AllZeroFeatures,

    #[error("potential sum for pixel {pixel} underflowed to zero; sigma is too small for the embedding scale")]
    DegenerateRow { pixel: usize },

    #[error("loss became non-finite at iteration {iteration}; learning rate too high?")]
    NonFiniteLoss { iteration: usize },

    #[error("no superpixel contains a point label")]
    NoLabeledSuperpixels,

    #[error("no pixels left to evaluate after exclusions")]
    EmptyEvaluation,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid palette: {0}")]
    Palette(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input (as opposed to a failed run).
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io(_)
                | Error::DegenerateRow { .. }
                | Error::NonFiniteLoss { .. }
                | Error::AllZeroFeatures
                | Error::NoLabeledSuperpixels
        )
    }
}
