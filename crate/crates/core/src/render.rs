//! Color tables and inspection overlays.

use crate::error::Result;
use crate::overseg::SuperpixelMap;
use crate::raster::{ClassId, LabelMap, RasterImage};

/// Eight distinguishable class colors; class `j ≥ 1` uses entry `(j − 1) mod 8`.
pub const CLASS_COLORS: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [255, 225, 25],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
];

pub const BOUNDARY_COLOR: [u8; 3] = [255, 255, 0];

pub fn class_color(class: ClassId) -> [u8; 3] {
    match class {
        0 => [0, 0, 0],
        j => CLASS_COLORS[(j as usize - 1) % CLASS_COLORS.len()],
    }
}

/// Palette indexed by class id for `0..=k`.
pub fn default_palette(k: ClassId) -> Vec<[u8; 3]> {
    (0..=k).map(class_color).collect()
}

/// The image with superpixel boundaries painted over it.
pub fn boundary_overlay(image: &RasterImage, sp: &SuperpixelMap) -> Result<RasterImage> {
    image_dims_match(image, sp.width(), sp.height())?;
    let mask = sp.boundary_mask();
    let pixels = image
        .pixels()
        .iter()
        .zip(&mask)
        .map(|(&p, &edge)| if edge { BOUNDARY_COLOR } else { p })
        .collect();
    RasterImage::new(image.width(), image.height(), pixels)
}

/// The image alpha-blended with class colors (`opacity` in `[0, 1]`), with
/// superpixel boundaries drawn on top when `sp` is given. Void pixels are
/// left untouched.
pub fn segmentation_overlay(
    image: &RasterImage,
    labels: &LabelMap,
    sp: Option<&SuperpixelMap>,
    opacity: f64,
) -> Result<RasterImage> {
    labels.same_dims(image.width(), image.height())?;
    let opacity = opacity.clamp(0.0, 1.0);
    let mask = match sp {
        Some(sp) => {
            image_dims_match(image, sp.width(), sp.height())?;
            sp.boundary_mask()
        }
        None => vec![false; image.len()],
    };
    let pixels = image
        .pixels()
        .iter()
        .zip(labels.labels())
        .zip(&mask)
        .map(|((&p, &label), &edge)| {
            if edge {
                return BOUNDARY_COLOR;
            }
            if label == 0 {
                return p;
            }
            let c = class_color(label);
            std::array::from_fn(|i| {
                (p[i] as f64 * (1.0 - opacity) + c[i] as f64 * opacity).round() as u8
            })
        })
        .collect();
    RasterImage::new(image.width(), image.height(), pixels)
}

fn image_dims_match(image: &RasterImage, width: u32, height: u32) -> Result<()> {
    if image.width() != width || image.height() != height {
        return Err(crate::Error::DimensionMismatch(
            image.width(),
            image.height(),
            width,
            height,
        ));
    }
    Ok(())
}
