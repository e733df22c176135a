//! Dataset benchmark: one-shot segmentation from seed masks, scored against
//! ground truth.
//!
//! Layout: `DATASET/images/<id>.<ext>`, `DATASET/gt/<id>_<g>.png` and
//! `SEEDS/<id>_<g>.png`. An image may have several ground truths `<g>`;
//! each `(id, g)` pair is one report row.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::Result;
use crate::overseg::FhParams;
use crate::raster::{load_image, load_label_map, ClassId};
use crate::session::Session;
use crate::svm::SvmParams;

use super::{accuracy, boundary_accuracy, dice, dice_literal, object_accuracy};

pub const CSV_HEADER: &str = "image,gt,acc,boundary,object,dice,seed_pixels,ms";

#[derive(Debug, Clone)]
pub struct BenchParams {
    pub fh: FhParams,
    pub svm: SvmParams,
    /// Fuzzy border radius for boundary accuracy.
    pub radius: u32,
    /// Class scored by object accuracy on binary ground truths.
    pub object_class: ClassId,
    /// Report the unnormalized printed Dice sum instead of the class mean.
    pub literal_dice: bool,
}

impl Default for BenchParams {
    fn default() -> Self {
        Self {
            fh: FhParams::default(),
            svm: SvmParams::default(),
            radius: 4,
            object_class: 1,
            literal_dice: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub gt: String,
    pub acc: f64,
    pub boundary: f64,
    /// Only computed when the ground truth has at most two classes.
    pub object: Option<f64>,
    pub dice: f64,
    pub seed_pixels: usize,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchMeans {
    pub acc: f64,
    pub boundary: f64,
    pub object: Option<f64>,
    pub dice: f64,
    pub seed_pixels: f64,
    pub ms: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// `(row name, reason)` for triples that could not be evaluated.
    pub failures: Vec<(String, String)>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, sum) = values.fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    (n > 0).then(|| sum / n as f64)
}

impl BenchReport {
    /// Arithmetic means over the rows, `None` for an empty report. Object
    /// accuracy is averaged over the rows that have it.
    pub fn means(&self) -> Option<BenchMeans> {
        let rows = &self.rows;
        Some(BenchMeans {
            acc: mean(rows.iter().map(|r| r.acc))?,
            boundary: mean(rows.iter().map(|r| r.boundary))?,
            object: mean(rows.iter().filter_map(|r| r.object)),
            dice: mean(rows.iter().map(|r| r.dice))?,
            seed_pixels: mean(rows.iter().map(|r| r.seed_pixels as f64))?,
            ms: mean(rows.iter().map(|r| r.ms))?,
        })
    }

    /// CSV with one line per row and a trailing `MEAN` line. Missing values
    /// are left empty.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.image,
                r.gt,
                r.acc,
                r.boundary,
                opt(r.object),
                r.dice,
                r.seed_pixels,
                r.ms
            );
        }
        if let Some(m) = self.means() {
            let _ = writeln!(
                out,
                "MEAN,,{},{},{},{},{},{}",
                m.acc,
                m.boundary,
                opt(m.object),
                m.dice,
                m.seed_pixels,
                m.ms
            );
        }
        out
    }
}

/// Runs every `(image, ground truth, seed mask)` triple found under
/// `dataset_dir` and `seeds_dir`. Rows are ordered by ground-truth file
/// name. Problems with individual triples land in
/// [`BenchReport::failures`]; only an unreadable `gt` directory is fatal,
/// and a missing one yields an empty report.
pub fn run_benchmark(
    dataset_dir: impl AsRef<Path>,
    seeds_dir: impl AsRef<Path>,
    params: &BenchParams,
) -> Result<BenchReport> {
    let dataset_dir = dataset_dir.as_ref();
    let gt_dir = dataset_dir.join("gt");
    let mut report = BenchReport::default();
    if !gt_dir.is_dir() {
        return Ok(report);
    }
    let mut gts: Vec<PathBuf> = fs::read_dir(&gt_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    gts.sort();

    for gt_path in gts {
        let Some(stem) = gt_path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let Some((id, _)) = stem.rsplit_once('_') else {
            report
                .failures
                .push((stem.to_string(), "ground truth name lacks `_<g>`".into()));
            continue;
        };
        let Some(image_path) = find_image(&dataset_dir.join("images"), id) else {
            report
                .failures
                .push((stem.to_string(), format!("no image for id `{id}`")));
            continue;
        };
        let seed_path = seeds_dir.as_ref().join(format!("{stem}.png"));
        match evaluate(&image_path, &gt_path, &seed_path, params) {
            Ok((row_metrics, seed_pixels, ms)) => report.rows.push(BenchRow {
                image: id.to_string(),
                gt: stem.to_string(),
                acc: row_metrics[0],
                boundary: row_metrics[1],
                object: row_metrics[2].is_finite().then_some(row_metrics[2]),
                dice: row_metrics[3],
                seed_pixels,
                ms,
            }),
            Err(e) => report.failures.push((stem.to_string(), e.to_string())),
        }
    }
    Ok(report)
}

fn find_image(dir: &Path, id: &str) -> Option<PathBuf> {
    let mut candidates: Vec<PathBuf> = fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.file_stem().and_then(|s| s.to_str()) == Some(id))
        .collect();
    candidates.sort();
    candidates.into_iter().next()
}

/// `[acc, boundary, object (NaN if not applicable), dice]`, seed pixel count
/// and segmentation wall time in milliseconds.
fn evaluate(
    image_path: &Path,
    gt_path: &Path,
    seed_path: &Path,
    params: &BenchParams,
) -> Result<([f64; 4], usize, f64)> {
    let image = load_image(image_path)?;
    let gt = load_label_map(gt_path)?;
    let seeds = load_label_map(seed_path)?;
    gt.same_dims(image.width(), image.height())?;

    let start = Instant::now();
    let mut session = Session::new(image, params.fh, params.svm)?;
    session.set_seed_mask(&seeds)?;
    let result = session.segment()?.clone();
    let ms = start.elapsed().as_secs_f64() * 1000.0;

    let object = if gt.num_classes() <= 2 {
        object_accuracy(&result, &gt, params.object_class)?
    } else {
        f64::NAN
    };
    let d = if params.literal_dice {
        dice_literal(&result, &gt)?
    } else {
        dice(&result, &gt)?
    };
    Ok((
        [
            accuracy(&result, &gt)?,
            boundary_accuracy(&result, &gt, params.radius)?,
            object,
            d,
        ],
        session.seeds().seed_pixel_count(),
        ms,
    ))
}
