//! Superpixel descriptors: mean color and center of mass, all scaled to
//! `[0, 1]`.
//!
//! Colors are divided by 255 and centroid coordinates by `width − 1` and
//! `height − 1`, so both image borders map to 0 and 1. A degenerate axis of
//! length 1 maps to 0. The scaling is fixed rather than fitted to the data,
//! so descriptors never change as seeds are added.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::overseg::SuperpixelMap;
use crate::raster::RasterImage;

pub const DESCRIPTOR_DIM: usize = 5;

/// `[mean_r, mean_g, mean_b, cx, cy]`, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Descriptor(pub [f64; DESCRIPTOR_DIM]);

impl Descriptor {
    pub fn new(mean_r: f64, mean_g: f64, mean_b: f64, cx: f64, cy: f64) -> Self {
        Self([mean_r, mean_g, mean_b, cx, cy])
    }

    pub fn mean_r(&self) -> f64 {
        self.0[0]
    }

    pub fn mean_g(&self) -> f64 {
        self.0[1]
    }

    pub fn mean_b(&self) -> f64 {
        self.0[2]
    }

    pub fn cx(&self) -> f64 {
        self.0[3]
    }

    pub fn cy(&self) -> f64 {
        self.0[4]
    }

    pub fn squared_distance(&self, other: &Descriptor) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

impl From<[f64; DESCRIPTOR_DIM]> for Descriptor {
    fn from(v: [f64; DESCRIPTOR_DIM]) -> Self {
        Self(v)
    }
}

/// One descriptor per superpixel, indexed by superpixel id.
pub fn describe_all(sp: &SuperpixelMap, image: &RasterImage) -> Result<Vec<Descriptor>> {
    if sp.width() != image.width() || sp.height() != image.height() {
        return Err(crate::Error::DimensionMismatch(
            sp.width(),
            sp.height(),
            image.width(),
            image.height(),
        ));
    }
    let width = image.width() as usize;
    let scale = |extent: u32| {
        if extent > 1 {
            1.0 / (extent - 1) as f64
        } else {
            0.0
        }
    };
    let (sx, sy) = (scale(image.width()), scale(image.height()));
    let pixels = image.pixels();

    Ok(sp
        .superpixels()
        .iter()
        .map(|members| {
            let mut acc = [0.0f64; DESCRIPTOR_DIM];
            for &p in members {
                let p = p as usize;
                let [r, g, b] = pixels[p];
                acc[0] += r as f64;
                acc[1] += g as f64;
                acc[2] += b as f64;
                acc[3] += (p % width) as f64;
                acc[4] += (p / width) as f64;
            }
            let n = members.len() as f64;
            Descriptor([
                acc[0] / n / 255.0,
                acc[1] / n / 255.0,
                acc[2] / n / 255.0,
                acc[3] / n * sx,
                acc[4] / n * sy,
            ])
        })
        .collect())
}

/// CSV dump with header `id,mean_r,mean_g,mean_b,cx,cy`.
pub fn descriptors_csv(descriptors: &[Descriptor]) -> String {
    let mut out = String::from("id,mean_r,mean_g,mean_b,cx,cy\n");
    for (id, d) in descriptors.iter().enumerate() {
        let [r, g, b, x, y] = d.0;
        let _ = writeln!(out, "{id},{r},{g},{b},{x},{y}");
    }
    out
}
