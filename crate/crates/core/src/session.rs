//! The interactive loop: seeds in, segmentation out.
//!
//! A [`Session`] over-segments its image and computes descriptors once. Each
//! call to [`Session::segment`] then derives the per-class training sets from
//! the current seeds, retrains the classifier from scratch and labels every
//! superpixel. Because nothing carries over between calls, the result is a
//! pure function of the image, the parameters and the seeds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::descriptor::{describe_all, Descriptor};
use crate::error::{Error, Result};
use crate::overseg::{felzenszwalb_segment, FhParams, SuperpixelMap};
use crate::raster::{ClassId, LabelMap, RasterImage};
use crate::svm::{train, SvmModel, SvmParams};

/// A brush stroke: every pixel within `brush_radius` (Euclidean) of one of
/// `points` gets `class_id`, or the void label when `erase` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    #[serde(default)]
    pub class_id: ClassId,
    #[serde(default)]
    pub erase: bool,
    #[serde(default)]
    pub brush_radius: f64,
    /// `[x, y]` image coordinates.
    pub points: Vec<[i64; 2]>,
}

impl Stroke {
    pub fn paint(class_id: ClassId, points: Vec<(u32, u32)>, brush_radius: f64) -> Self {
        Self {
            class_id,
            erase: false,
            brush_radius,
            points: points
                .into_iter()
                .map(|(x, y)| [x as i64, y as i64])
                .collect(),
        }
    }

    pub fn erase(points: Vec<(u32, u32)>, brush_radius: f64) -> Self {
        Self {
            erase: true,
            ..Self::paint(0, points, brush_radius)
        }
    }

    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        if !self.erase && self.class_id == 0 {
            return Err(Error::InvalidStroke("class_id must be >= 1".into()));
        }
        if !(self.brush_radius >= 0.0 && self.brush_radius.is_finite()) {
            return Err(Error::InvalidStroke(format!(
                "brush_radius must be >= 0, got {}",
                self.brush_radius
            )));
        }
        for &[x, y] in &self.points {
            if x < 0 || y < 0 || x >= width as i64 || y >= height as i64 {
                return Err(Error::OutOfBounds(x, y));
            }
        }
        Ok(())
    }

    fn label(&self) -> ClassId {
        if self.erase {
            0
        } else {
            self.class_id
        }
    }
}

/// Per-pixel seed labels (0 = void) and the strokes that produced them.
///
/// Labels always equal `base` with the stroke log painted over it in order;
/// `base` is empty unless the state was initialized from a seed mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedState {
    width: u32,
    height: u32,
    base: Vec<ClassId>,
    labels: Vec<ClassId>,
    strokes: Vec<Stroke>,
}

impl SeedState {
    pub fn new(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            base: vec![0; n],
            labels: vec![0; n],
            strokes: Vec::new(),
        }
    }

    pub fn from_mask(mask: &LabelMap) -> Self {
        Self {
            width: mask.width(),
            height: mask.height(),
            base: mask.labels().to_vec(),
            labels: mask.labels().to_vec(),
            strokes: Vec::new(),
        }
    }

    pub fn apply(&mut self, stroke: Stroke) -> Result<()> {
        stroke.validate(self.width, self.height)?;
        paint(&mut self.labels, self.width, self.height, &stroke);
        self.strokes.push(stroke);
        Ok(())
    }

    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    pub fn stroke_log(&self) -> &[Stroke] {
        &self.strokes
    }

    /// `K`, the largest class id present.
    pub fn num_classes(&self) -> ClassId {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Distinct seeded class ids, ascending.
    pub fn classes(&self) -> Vec<ClassId> {
        let mut present = [false; 256];
        for &l in &self.labels {
            present[l as usize] = true;
        }
        (1..=255u8).filter(|&c| present[c as usize]).collect()
    }

    pub fn seed_pixel_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l != 0).count()
    }

    pub fn to_label_map(&self) -> LabelMap {
        LabelMap::new(self.width, self.height, self.labels.clone())
            .expect("seed labels always match the image size")
    }

    /// Labels recomputed from the base mask and the stroke log.
    pub fn replayed(&self) -> Vec<ClassId> {
        let mut labels = self.base.clone();
        for s in &self.strokes {
            paint(&mut labels, self.width, self.height, s);
        }
        labels
    }
}

fn paint(labels: &mut [ClassId], width: u32, height: u32, stroke: &Stroke) {
    let label = stroke.label();
    let r = stroke.brush_radius;
    let reach = r.floor() as i64;
    let r2 = r * r;
    let (w, h) = (width as i64, height as i64);
    for &[px, py] in &stroke.points {
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                if ((dx * dx + dy * dy) as f64) > r2 {
                    continue;
                }
                let (x, y) = (px + dx, py + dy);
                if x >= 0 && y >= 0 && x < w && y < h {
                    labels[(y * w + x) as usize] = label;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    image: RasterImage,
    sp: SuperpixelMap,
    descriptors: Vec<Descriptor>,
    seeds: SeedState,
    model: Option<SvmModel>,
    segmentation: Option<LabelMap>,
    fh: FhParams,
    svm: SvmParams,
}

impl Session {
    /// Over-segments the image and describes every superpixel. Neither is
    /// recomputed for the lifetime of the session.
    pub fn new(image: RasterImage, fh: FhParams, svm: SvmParams) -> Result<Self> {
        svm.validate()?;
        let sp = felzenszwalb_segment(&image, &fh)?;
        let descriptors = describe_all(&sp, &image)?;
        let seeds = SeedState::new(image.width(), image.height());
        Ok(Self {
            image,
            sp,
            descriptors,
            seeds,
            model: None,
            segmentation: None,
            fh,
            svm,
        })
    }

    /// Replaces the seeds by a seed mask (0 = unlabeled).
    pub fn set_seed_mask(&mut self, mask: &LabelMap) -> Result<()> {
        mask.same_dims(self.image.width(), self.image.height())?;
        self.seeds = SeedState::from_mask(mask);
        Ok(())
    }

    pub fn image(&self) -> &RasterImage {
        &self.image
    }

    pub fn superpixels(&self) -> &SuperpixelMap {
        &self.sp
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.descriptors
    }

    pub fn seeds(&self) -> &SeedState {
        &self.seeds
    }

    pub fn model(&self) -> Option<&SvmModel> {
        self.model.as_ref()
    }

    pub fn segmentation(&self) -> Option<&LabelMap> {
        self.segmentation.as_ref()
    }

    pub fn fh_params(&self) -> &FhParams {
        &self.fh
    }

    pub fn svm_params(&self) -> &SvmParams {
        &self.svm
    }

    /// Seeded class ids, ascending. Position in this list is the compact
    /// class index used internally; output labels keep the original ids.
    pub fn classes(&self) -> Vec<ClassId> {
        self.seeds.classes()
    }

    pub fn apply_stroke(&mut self, stroke: Stroke) -> Result<()> {
        self.seeds.apply(stroke)
    }

    /// Superpixels holding at least one seed of class `j` and no seed of any
    /// other class, keyed by `j`. Ids are ascending.
    pub fn training_sets(&self) -> BTreeMap<ClassId, Vec<usize>> {
        let mut sets: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
        for (id, class) in self.training_labels().into_iter().enumerate() {
            if let Some(class) = class {
                sets.entry(class).or_default().push(id);
            }
        }
        sets
    }

    /// The unambiguous seed class of each superpixel, if any.
    fn training_labels(&self) -> Vec<Option<ClassId>> {
        let seeds = self.seeds.labels();
        self.sp
            .superpixels()
            .iter()
            .map(|pixels| {
                let mut class = None;
                for &p in pixels {
                    match (seeds[p as usize], class) {
                        (0, _) => {}
                        (l, None) => class = Some(l),
                        (l, Some(c)) if l != c => return None,
                        _ => {}
                    }
                }
                class
            })
            .collect()
    }

    /// Trains on the seeded superpixels and labels the image. On failure the
    /// previous model and segmentation are discarded.
    pub fn segment(&mut self) -> Result<&LabelMap> {
        self.model = None;
        self.segmentation = None;

        let classes = self.seeds.classes();
        if classes.len() < 2 {
            return Err(Error::TooFewClasses);
        }
        let assigned = self.training_labels();
        let mut trained = [false; 256];
        let (mut samples, mut labels) = (Vec::new(), Vec::new());
        for (id, class) in assigned.iter().enumerate() {
            if let Some(c) = *class {
                trained[c as usize] = true;
                samples.push(self.descriptors[id]);
                labels.push(c);
            }
        }
        let missing: Vec<ClassId> = classes
            .iter()
            .copied()
            .filter(|&c| !trained[c as usize])
            .collect();
        if !missing.is_empty() {
            return Err(Error::ClassesWithoutTraining(missing));
        }

        let model = train(&samples, &labels, &self.svm)?;
        let per_superpixel: Vec<ClassId> = assigned
            .iter()
            .zip(&self.descriptors)
            .map(|(class, d)| class.unwrap_or_else(|| model.predict(d)))
            .collect();
        let pixels = self
            .sp
            .assignment()
            .iter()
            .map(|&id| per_superpixel[id as usize])
            .collect();
        let map = LabelMap::with_classes(
            self.image.width(),
            self.image.height(),
            pixels,
            self.seeds.num_classes(),
        )?;
        self.model = Some(model);
        Ok(self.segmentation.insert(map))
    }

    /// Applies `strokes` in order, then re-segments. Strokes are validated
    /// up front; if any is invalid none is applied.
    pub fn update(&mut self, strokes: Vec<Stroke>) -> Result<&LabelMap> {
        for s in &strokes {
            s.validate(self.image.width(), self.image.height())?;
        }
        for s in strokes {
            self.seeds.apply(s)?;
        }
        self.segment()
    }
}
