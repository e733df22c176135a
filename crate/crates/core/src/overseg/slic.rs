//! SLIC superpixels (Achanta et al.).
//!
//! Cluster centers start on a regular grid of step `sqrt(avg_size)` and are
//! nudged to the lowest-gradient pixel of their 3×3 neighborhood. Ten rounds
//! of localized k-means in CIELAB + position space follow, each pixel only
//! considering centers within one step. A final pass relabels 4-connected
//! pieces and folds the small ones into an adjacent superpixel.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::SuperpixelMap;
use crate::error::{Error, Result};
use crate::raster::RasterImage;

const ITERATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlicParams {
    /// Target superpixel area in pixels.
    pub avg_size: usize,
    pub compactness: f64,
}

impl Default for SlicParams {
    fn default() -> Self {
        Self {
            avg_size: 100,
            compactness: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Center {
    lab: [f64; 3],
    x: f64,
    y: f64,
}

pub fn slic_segment(image: &RasterImage, params: &SlicParams) -> Result<SuperpixelMap> {
    if params.avg_size == 0 {
        return Err(Error::InvalidParameter("avg_size must be >= 1".into()));
    }
    if !(params.compactness > 0.0 && params.compactness.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "compactness must be > 0, got {}",
            params.compactness
        )));
    }
    if params.avg_size > image.len() {
        return Err(Error::InvalidParameter(format!(
            "avg_size {} exceeds the {} pixels of the image",
            params.avg_size,
            image.len()
        )));
    }

    let (w, h) = (image.width() as usize, image.height() as usize);
    let lab: Vec<[f64; 3]> = image.pixels().iter().map(|&p| rgb_to_lab(p)).collect();
    let step = (params.avg_size as f64).sqrt();
    let mut centers = seed_centers(&lab, w, h, step);

    let spatial = (params.compactness / step).powi(2);
    let reach = step.ceil() as i64;
    let mut label = vec![usize::MAX; w * h];
    let mut best = vec![f64::INFINITY; w * h];

    for _ in 0..ITERATIONS {
        best.fill(f64::INFINITY);
        for (ci, c) in centers.iter().enumerate() {
            let (cx, cy) = (c.x.round() as i64, c.y.round() as i64);
            let x0 = (cx - reach).max(0) as usize;
            let x1 = (cx + reach).min(w as i64 - 1) as usize;
            let y0 = (cy - reach).max(0) as usize;
            let y1 = (cy + reach).min(h as i64 - 1) as usize;
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let i = y * w + x;
                    let p = lab[i];
                    let dc = (p[0] - c.lab[0]).powi(2)
                        + (p[1] - c.lab[1]).powi(2)
                        + (p[2] - c.lab[2]).powi(2);
                    let ds = (x as f64 - c.x).powi(2) + (y as f64 - c.y).powi(2);
                    let d = dc + spatial * ds;
                    if d < best[i] {
                        best[i] = d;
                        label[i] = ci;
                    }
                }
            }
        }

        let mut sums = vec![[0.0f64; 6]; centers.len()];
        for (i, &l) in label.iter().enumerate() {
            if l == usize::MAX {
                continue;
            }
            let s = &mut sums[l];
            s[0] += lab[i][0];
            s[1] += lab[i][1];
            s[2] += lab[i][2];
            s[3] += (i % w) as f64;
            s[4] += (i / w) as f64;
            s[5] += 1.0;
        }
        for (c, s) in centers.iter_mut().zip(&sums) {
            if s[5] > 0.0 {
                let n = s[5];
                *c = Center {
                    lab: [s[0] / n, s[1] / n, s[2] / n],
                    x: s[3] / n,
                    y: s[4] / n,
                };
            }
        }
    }

    let regions = enforce_connectivity(&label, w, h, params.avg_size / 4);
    SuperpixelMap::from_regions(image.width(), image.height(), &regions)
}

fn seed_centers(lab: &[[f64; 3]], w: usize, h: usize, step: f64) -> Vec<Center> {
    let nx = ((w as f64 / step).round() as usize).max(1);
    let ny = ((h as f64 / step).round() as usize).max(1);
    let gradient = |x: usize, y: usize| {
        let at = |x: usize, y: usize| lab[y * w + x];
        let (l, r) = (at(x.saturating_sub(1), y), at((x + 1).min(w - 1), y));
        let (u, d) = (at(x, y.saturating_sub(1)), at(x, (y + 1).min(h - 1)));
        (0..3)
            .map(|c| (r[c] - l[c]).powi(2) + (d[c] - u[c]).powi(2))
            .sum::<f64>()
    };
    let mut centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let fx = (i as f64 + 0.5) * w as f64 / nx as f64 - 0.5;
            let fy = (j as f64 + 0.5) * h as f64 / ny as f64 - 0.5;
            let gx = (fx.round() as usize).min(w - 1);
            let gy = (fy.round() as usize).min(h - 1);
            let (mut bx, mut by, mut bg) = (gx, gy, gradient(gx, gy));
            for y in gy.saturating_sub(1)..=(gy + 1).min(h - 1) {
                for x in gx.saturating_sub(1)..=(gx + 1).min(w - 1) {
                    let g = gradient(x, y);
                    if g < bg {
                        (bx, by, bg) = (x, y, g);
                    }
                }
            }
            let (x, y) = if (bx, by) == (gx, gy) {
                (fx, fy)
            } else {
                (bx as f64, by as f64)
            };
            centers.push(Center {
                lab: lab[by * w + bx],
                x,
                y,
            });
        }
    }
    centers
}

/// Relabels 4-connected runs of equal cluster labels. Pieces of at most
/// `min_piece` pixels take the label of an already relabeled 4-neighbor of
/// their first pixel, which keeps every output region connected.
fn enforce_connectivity(label: &[usize], w: usize, h: usize, min_piece: usize) -> Vec<usize> {
    let mut out = vec![usize::MAX; label.len()];
    let mut next = 0usize;
    let mut queue = VecDeque::new();
    let mut piece = Vec::new();
    for start in 0..label.len() {
        if out[start] != usize::MAX {
            continue;
        }
        let (sx, sy) = (start % w, start / w);
        let adjacent = [
            (sx > 0).then(|| start - 1),
            (sy > 0).then(|| start - w),
            (sx + 1 < w).then(|| start + 1),
            (sy + 1 < h).then(|| start + w),
        ]
        .into_iter()
        .flatten()
        .map(|n| out[n])
        .find(|&l| l != usize::MAX);

        piece.clear();
        out[start] = next;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            piece.push(p);
            let (px, py) = (p % w, p / w);
            let neighbors = [
                (px > 0).then(|| p - 1),
                (py > 0).then(|| p - w),
                (px + 1 < w).then(|| p + 1),
                (py + 1 < h).then(|| p + w),
            ];
            for n in neighbors.into_iter().flatten() {
                if out[n] == usize::MAX && label[n] == label[start] {
                    out[n] = next;
                    queue.push_back(n);
                }
            }
        }
        match adjacent {
            Some(target) if piece.len() <= min_piece => {
                for &p in &piece {
                    out[p] = target;
                }
            }
            _ => next += 1,
        }
    }
    out
}

/// sRGB (D65) to CIELAB.
fn rgb_to_lab(p: [u8; 3]) -> [f64; 3] {
    let lin = |c: u8| {
        let c = c as f64 / 255.0;
        if c <= 0.04045 {
            c / 12.92
        } else {
            ((c + 0.055) / 1.055).powf(2.4)
        }
    };
    let (r, g, b) = (lin(p[0]), lin(p[1]), lin(p[2]));
    let x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
    let f = |t: f64| {
        if t > 0.008856 {
            t.cbrt()
        } else {
            7.787 * t + 16.0 / 116.0
        }
    };
    let (fx, fy, fz) = (f(x), f(y), f(z));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}
