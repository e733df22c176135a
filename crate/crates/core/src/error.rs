use thiserror::Error;

use crate::raster::ClassId;
use crate::svm::SvmModel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unreadable file: {0}")]
    Unreadable(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("zero-dimension image")]
    ZeroDimension,

    #[error("multi-channel input")]
    MultiChannel,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ground truth contains void labels")]
    VoidLabel,

    #[error("fewer than 2 classes: nothing to separate")]
    NothingToSeparate,

    /// The solver hit its iteration cap. The best model reached so far is
    /// carried along so callers may still use it.
    #[error("SVM training did not converge within {iterations} iterations")]
    NotConverged {
        iterations: usize,
        model: Box<SvmModel>,
    },

    #[error("point ({0}, {1}) is outside the image")]
    OutOfBounds(i64, i64),

    #[error("invalid stroke: {0}")]
    InvalidStroke(String),

    #[error("<2 classes seeded")]
    TooFewClasses,

    /// Seeded classes whose every seeded superpixel also holds seeds of
    /// another class, so they contribute nothing to training.
    #[error("classes without an unambiguous seeded superpixel: {0:?}")]
    ClassesWithoutTraining(Vec<ClassId>),

    #[error("serialization: {0}")]
    Serialization(String),
}
