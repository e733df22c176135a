//! Superpixel over-segmentation.
//!
//! Two producers are available: the graph-based Felzenszwalb–Huttenlocher
//! merge ([`felzenszwalb_segment`], the default) and SLIC clustering
//! ([`slic_segment`]). Both return a [`SuperpixelMap`] with dense ids.

mod felzenszwalb;
mod slic;

pub use felzenszwalb::{felzenszwalb_segment, FhParams};
pub use slic::{slic_segment, SlicParams};

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::raster::{encode_png, ClassId, LabelMap};

/// Pixel → superpixel assignment plus per-superpixel pixel lists.
///
/// Ids are dense in `0..count()` and numbered in order of first appearance
/// in a raster scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperpixelMap {
    width: u32,
    height: u32,
    assignment: Vec<u32>,
    superpixels: Vec<Vec<u32>>,
}

impl SuperpixelMap {
    /// Builds a map from arbitrary per-pixel region keys, renumbering them
    /// densely by first appearance.
    pub fn from_regions(width: u32, height: u32, regions: &[usize]) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if regions.len() != width as usize * height as usize {
            return Err(Error::InvalidParameter(format!(
                "{} region keys for a {width}x{height} image",
                regions.len()
            )));
        }
        let mut remap = std::collections::HashMap::new();
        let mut assignment = Vec::with_capacity(regions.len());
        let mut superpixels: Vec<Vec<u32>> = Vec::new();
        for (idx, &key) in regions.iter().enumerate() {
            let id = *remap.entry(key).or_insert_with(|| {
                superpixels.push(Vec::new());
                superpixels.len() as u32 - 1
            });
            superpixels[id as usize].push(idx as u32);
            assignment.push(id);
        }
        Ok(Self {
            width,
            height,
            assignment,
            superpixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Superpixel count `S`.
    pub fn count(&self) -> usize {
        self.superpixels.len()
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn id_at(&self, x: u32, y: u32) -> u32 {
        self.assignment[y as usize * self.width as usize + x as usize]
    }

    /// Pixel indices of superpixel `id`, ascending.
    pub fn pixels(&self, id: usize) -> &[u32] {
        &self.superpixels[id]
    }

    pub fn superpixels(&self) -> &[Vec<u32>] {
        &self.superpixels
    }

    /// Renames superpixel `id` to `perm[id]`; `perm` must be a permutation.
    #[cfg(test)]
    pub(crate) fn permuted(&self, perm: &[u32]) -> Self {
        let mut superpixels = vec![Vec::new(); self.count()];
        for (id, pixels) in self.superpixels.iter().enumerate() {
            superpixels[perm[id] as usize] = pixels.clone();
        }
        Self {
            width: self.width,
            height: self.height,
            assignment: self
                .assignment
                .iter()
                .map(|&id| perm[id as usize])
                .collect(),
            superpixels,
        }
    }

    /// Pixels with a 4-neighbor in a different superpixel.
    pub fn boundary_mask(&self) -> Vec<bool> {
        let (w, h) = (self.width as usize, self.height as usize);
        let a = &self.assignment;
        let mut mask = vec![false; a.len()];
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w && a[i] != a[i + 1] {
                    mask[i] = true;
                    mask[i + 1] = true;
                }
                if y + 1 < h && a[i] != a[i + w] {
                    mask[i] = true;
                    mask[i + w] = true;
                }
            }
        }
        mask
    }

    /// True when every superpixel is a single 8-connected component.
    pub fn is_connected(&self) -> bool {
        let (w, h) = (self.width as i64, self.height as i64);
        let mut seen = vec![false; self.assignment.len()];
        let mut queue = VecDeque::new();
        for (id, pixels) in self.superpixels.iter().enumerate() {
            let Some(&start) = pixels.first() else {
                return false;
            };
            let mut reached = 0usize;
            seen[start as usize] = true;
            queue.push_back(start as usize);
            while let Some(p) = queue.pop_front() {
                reached += 1;
                let (px, py) = (p as i64 % w, p as i64 / w);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (px + dx, py + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let n = (ny * w + nx) as usize;
                        if !seen[n] && self.assignment[n] as usize == id {
                            seen[n] = true;
                            queue.push_back(n);
                        }
                    }
                }
            }
            if reached != pixels.len() {
                return false;
            }
        }
        true
    }

    /// Checks that assignment and pixel lists describe the same partition.
    pub fn is_consistent(&self) -> bool {
        let mut covered = vec![false; self.assignment.len()];
        for (id, pixels) in self.superpixels.iter().enumerate() {
            if pixels.is_empty() {
                return false;
            }
            for &p in pixels {
                let p = p as usize;
                if p >= covered.len() || covered[p] || self.assignment[p] as usize != id {
                    return false;
                }
                covered[p] = true;
            }
        }
        covered.iter().all(|&c| c)
    }

    /// Encodes the ids as a grayscale PNG: 8-bit when `S ≤ 256`, 16-bit when
    /// `S ≤ 65536`.
    pub fn encode_id_png(&self) -> Result<Vec<u8>> {
        let s = self.count();
        if s <= 256 {
            let data: Vec<u8> = self.assignment.iter().map(|&id| id as u8).collect();
            encode_png(
                self.width,
                self.height,
                png::ColorType::Grayscale,
                png::BitDepth::Eight,
                None,
                &data,
            )
        } else if s <= 65536 {
            let data: Vec<u8> = self
                .assignment
                .iter()
                .flat_map(|&id| (id as u16).to_be_bytes())
                .collect();
            encode_png(
                self.width,
                self.height,
                png::ColorType::Grayscale,
                png::BitDepth::Sixteen,
                None,
                &data,
            )
        } else {
            Err(Error::InvalidParameter(format!(
                "{s} superpixels do not fit a 16-bit id raster"
            )))
        }
    }
}

/// Percentage of pixels that do not belong to the majority ground-truth class
/// of their superpixel. Majority ties go to the smaller class id.
pub fn oversegmentation_error(sp: &SuperpixelMap, gt: &LabelMap) -> Result<f64> {
    gt.same_dims(sp.width, sp.height)?;
    if !gt.is_total() {
        return Err(Error::VoidLabel);
    }
    let labels = gt.labels();
    let mut wrong = 0usize;
    for pixels in &sp.superpixels {
        let majority = majority_class(pixels, labels);
        wrong += pixels
            .iter()
            .filter(|&&p| labels[p as usize] != majority)
            .count();
    }
    Ok(100.0 * wrong as f64 / labels.len() as f64)
}

/// Majority class per superpixel, smallest id on ties.
pub(crate) fn majority_class(pixels: &[u32], labels: &[ClassId]) -> ClassId {
    let mut counts = [0usize; 256];
    for &p in pixels {
        counts[labels[p as usize] as usize] += 1;
    }
    let mut best = 0;
    for class in 1..256 {
        if counts[class] > counts[best] {
            best = class;
        }
    }
    best as ClassId
}
