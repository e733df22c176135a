//! Graph-based segmentation (Felzenszwalb & Huttenlocher, 2004).
//!
//! Pixels are nodes of an 8-connected grid graph weighted by the Euclidean
//! RGB distance of the (optionally Gaussian-smoothed) image. Edges are visited
//! by increasing weight and two components merge when the edge is no heavier
//! than either component's internal difference plus `k / |C|`. A second pass
//! over the same order absorbs components smaller than `min_size` into the
//! neighbor they share the lightest edge with.

use serde::{Deserialize, Serialize};

use super::SuperpixelMap;
use crate::error::{Error, Result};
use crate::raster::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FhParams {
    /// Scale of the threshold function `k / |C|`.
    pub k: f64,
    /// Smallest allowed superpixel, in pixels.
    pub min_size: usize,
    /// Gaussian pre-smoothing std-dev in pixels; `0` disables smoothing.
    pub smoothing_sigma: f64,
}

impl Default for FhParams {
    fn default() -> Self {
        Self {
            k: 24.0,
            min_size: 20,
            smoothing_sigma: 0.8,
        }
    }
}

impl FhParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "k must be > 0, got {}",
                self.k
            )));
        }
        if self.min_size == 0 {
            return Err(Error::InvalidParameter("min_size must be >= 1".into()));
        }
        if !(self.smoothing_sigma >= 0.0 && self.smoothing_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "smoothing_sigma must be >= 0, got {}",
                self.smoothing_sigma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    weight: f64,
    a: u32,
    b: u32,
}

/// Disjoint sets with union by rank. Each root also tracks its size and the
/// merge threshold `Int(C) + k / |C|`.
struct Forest {
    parent: Vec<u32>,
    rank: Vec<u8>,
    size: Vec<u32>,
    threshold: Vec<f64>,
}

impl Forest {
    fn new(n: usize, k: f64) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            size: vec![1; n],
            threshold: vec![k; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    /// Joins two distinct roots and returns the surviving root. On equal rank
    /// the second root survives.
    fn join(&mut self, a: u32, b: u32) -> u32 {
        let (ai, bi) = (a as usize, b as usize);
        let (child, root) = if self.rank[ai] > self.rank[bi] {
            (b, a)
        } else {
            if self.rank[ai] == self.rank[bi] {
                self.rank[bi] += 1;
            }
            (a, b)
        };
        self.parent[child as usize] = root;
        self.size[root as usize] += self.size[child as usize];
        root
    }

    fn size(&self, root: u32) -> usize {
        self.size[root as usize] as usize
    }
}

pub fn felzenszwalb_segment(image: &RasterImage, params: &FhParams) -> Result<SuperpixelMap> {
    params.validate()?;
    let (w, h) = (image.width() as usize, image.height() as usize);
    let smoothed = smooth(image, params.smoothing_sigma);
    let edges = grid_edges(&smoothed, w, h);

    let mut forest = Forest::new(w * h, params.k);
    for e in &edges {
        let ra = forest.find(e.a);
        let rb = forest.find(e.b);
        if ra != rb
            && e.weight <= forest.threshold[ra as usize]
            && e.weight <= forest.threshold[rb as usize]
        {
            let root = forest.join(ra, rb);
            // edges arrive sorted, so `weight` is the new internal difference
            forest.threshold[root as usize] = e.weight + params.k / forest.size(root) as f64;
        }
    }

    for e in &edges {
        let ra = forest.find(e.a);
        let rb = forest.find(e.b);
        if ra != rb && (forest.size(ra) < params.min_size || forest.size(rb) < params.min_size) {
            forest.join(ra, rb);
        }
    }

    let regions: Vec<usize> = (0..(w * h) as u32)
        .map(|p| forest.find(p) as usize)
        .collect();
    SuperpixelMap::from_regions(image.width(), image.height(), &regions)
}

/// Edges to the right, down-right, down and up-right neighbors, sorted by
/// `(weight, a, b)`.
fn grid_edges(pixels: &[[f64; 3]], w: usize, h: usize) -> Vec<Edge> {
    let dist = |i: usize, j: usize| {
        let (p, q) = (pixels[i], pixels[j]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
    };
    let mut edges = Vec::with_capacity(w * h * 4);
    let mut push = |a: usize, b: usize| {
        edges.push(Edge {
            weight: dist(a, b),
            a: a as u32,
            b: b as u32,
        })
    };
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                push(i, i + 1);
            }
            if y + 1 < h {
                push(i, i + w);
            }
            if x + 1 < w && y + 1 < h {
                push(i, i + w + 1);
            }
            if x + 1 < w && y > 0 {
                push(i, i - w + 1);
            }
        }
    }
    edges.sort_unstable_by(|e, f| {
        e.weight
            .total_cmp(&f.weight)
            .then(e.a.cmp(&f.a))
            .then(e.b.cmp(&f.b))
    });
    edges
}

/// Separable Gaussian blur with clamped borders. The kernel spans
/// `ceil(4 sigma) + 1` taps on each side of the center.
fn smooth(image: &RasterImage, sigma: f64) -> Vec<[f64; 3]> {
    let src: Vec<[f64; 3]> = image
        .pixels()
        .iter()
        .map(|p| [p[0] as f64, p[1] as f64, p[2] as f64])
        .collect();
    if sigma <= 0.0 {
        return src;
    }
    let sigma = sigma.max(0.01);
    let len = (sigma * 4.0).ceil() as usize + 1;
    let mut mask: Vec<f64> = (0..len)
        .map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp())
        .collect();
    let total = 2.0 * mask.iter().sum::<f64>() - mask[0];
    mask.iter_mut().for_each(|m| *m /= total);

    let (w, h) = (image.width() as usize, image.height() as usize);
    let horizontal = blur_axis(&src, w, h, &mask, true);
    blur_axis(&horizontal, w, h, &mask, false)
}

fn blur_axis(
    src: &[[f64; 3]],
    w: usize,
    h: usize,
    mask: &[f64],
    horizontal: bool,
) -> Vec<[f64; 3]> {
    let mut out = vec![[0.0; 3]; src.len()];
    for y in 0..h {
        for x in 0..w {
            let (pos, last) = if horizontal { (x, w - 1) } else { (y, h - 1) };
            let at = |p: usize| {
                if horizontal {
                    src[y * w + p]
                } else {
                    src[p * w + x]
                }
            };
            let mut acc = at(pos).map(|v| v * mask[0]);
            for (off, &m) in mask.iter().enumerate().skip(1) {
                let (l, r) = (at(pos.saturating_sub(off)), at((pos + off).min(last)));
                for c in 0..3 {
                    acc[c] += m * (l[c] + r[c]);
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}
