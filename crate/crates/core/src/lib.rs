//! Interactive multiclass image segmentation by superpixel classification.
//!
//! The pipeline over-segments an image into superpixels once, describes each
//! superpixel by its mean color and center of mass, and then, every time the
//! user paints new seeds, trains a one-vs-one RBF C-SVM on the unambiguously
//! seeded superpixels and predicts a class for all the others.
//!
//! ```no_run
//! use scis_core::{FhParams, RasterImage, Session, Stroke, SvmParams};
//!
//! let image = RasterImage::load("photo.png")?;
//! let mut session = Session::new(image, FhParams::default(), SvmParams::default())?;
//! session.apply_stroke(Stroke::paint(1, vec![(10, 10), (20, 10)], 3.0))?;
//! session.apply_stroke(Stroke::paint(2, vec![(90, 90)], 3.0))?;
//! let labels = session.segment()?;
//! labels.save("labels.png", None)?;
//! # Ok::<(), scis_core::Error>(())
//! ```

pub mod descriptor;
pub mod error;
pub mod eval;
pub mod overseg;
pub mod raster;
pub mod render;
pub mod session;
pub mod svm;

pub use descriptor::{describe_all, Descriptor};
pub use error::{Error, Result};
pub use eval::{
    accuracy, boundary_accuracy, dice, dice_literal, fuzzify, internal_border,
    internal_border_with, object_accuracy, run_benchmark, BenchMeans, BenchParams, BenchReport,
    BenchRow, BorderSet, Connectivity, FuzzyBorder,
};
pub use overseg::{
    felzenszwalb_segment, oversegmentation_error, slic_segment, FhParams, SlicParams, SuperpixelMap,
};
pub use raster::{load_image, load_label_map, save_label_map, ClassId, LabelMap, RasterImage};
pub use session::{SeedState, Session, Stroke};
pub use svm::{rbf_kernel, train, BinaryModel, SvmModel, SvmParams};
