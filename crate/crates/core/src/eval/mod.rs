//! Segmentation quality measures and a dataset benchmark harness.
//!
//! All scores are percentages in `[0, 100]`, except [`dice_literal`], which
//! evaluates the unnormalized sum for comparison purposes.

mod bench;
mod fuzzy;

pub use bench::{run_benchmark, BenchMeans, BenchParams, BenchReport, BenchRow};
pub use fuzzy::{fuzzify, FuzzyBorder};

use crate::error::{Error, Result};
use crate::raster::{ClassId, LabelMap};

/// Neighborhood used to decide which pixels lie on an internal border.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

/// A crisp pixel set over a `width × height` grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BorderSet {
    width: u32,
    height: u32,
    mask: Vec<bool>,
}

impl BorderSet {
    /// # Panics
    /// If `mask.len() != width * height`.
    pub fn new(width: u32, height: u32, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), width as usize * height as usize);
        Self {
            width,
            height,
            mask,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.mask[y as usize * self.width as usize + x as usize]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

fn check_pair(result: &LabelMap, gt: &LabelMap) -> Result<()> {
    gt.same_dims(result.width(), result.height())
}

fn check_total(map: &LabelMap) -> Result<()> {
    if map.is_total() {
        Ok(())
    } else {
        Err(Error::VoidLabel)
    }
}

/// Percentage of pixels whose class matches.
pub fn accuracy(result: &LabelMap, gt: &LabelMap) -> Result<f64> {
    check_pair(result, gt)?;
    check_total(result)?;
    check_total(gt)?;
    let agree = result
        .labels()
        .iter()
        .zip(gt.labels())
        .filter(|(a, b)| a == b)
        .count();
    Ok(100.0 * agree as f64 / gt.len() as f64)
}

/// Pixels with at least one 4-neighbor of a different label.
pub fn internal_border(map: &LabelMap) -> BorderSet {
    internal_border_with(map, Connectivity::Four)
}

pub fn internal_border_with(map: &LabelMap, connectivity: Connectivity) -> BorderSet {
    let (w, h) = (map.width() as i64, map.height() as i64);
    let labels = map.labels();
    let offsets: &[(i64, i64)] = match connectivity {
        Connectivity::Four => &[(1, 0), (0, 1)],
        Connectivity::Eight => &[(1, 0), (0, 1), (1, 1), (-1, 1)],
    };
    let mut mask = vec![false; labels.len()];
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || nx >= w || ny >= h {
                    continue;
                }
                let j = (ny * w + nx) as usize;
                if labels[i] != labels[j] {
                    mask[i] = true;
                    mask[j] = true;
                }
            }
        }
    }
    BorderSet::new(map.width(), map.height(), mask)
}

/// `100 Σ min(B̃_G, B̃_M) / Σ max(B̃_G, B̃_M)` over fuzzified internal
/// borders. Two borderless maps score 100.
pub fn boundary_accuracy(result: &LabelMap, gt: &LabelMap, radius: u32) -> Result<f64> {
    check_pair(result, gt)?;
    check_total(result)?;
    check_total(gt)?;
    let bm = fuzzify(&internal_border(result), radius);
    let bg = fuzzify(&internal_border(gt), radius);
    let (mut lo, mut hi) = (0.0, 0.0);
    for (&m, &g) in bm.membership().iter().zip(bg.membership()) {
        lo += m.min(g);
        hi += m.max(g);
    }
    Ok(if hi == 0.0 { 100.0 } else { 100.0 * (lo / hi) })
}

/// Jaccard index of the `object_class` pixel sets, ×100. Two empty sets
/// score 100.
pub fn object_accuracy(result: &LabelMap, gt: &LabelMap, object_class: ClassId) -> Result<f64> {
    check_pair(result, gt)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&r, &g) in result.labels().iter().zip(gt.labels()) {
        let (r, g) = (r == object_class, g == object_class);
        inter += (r && g) as usize;
        union += (r || g) as usize;
    }
    Ok(if union == 0 {
        100.0
    } else {
        100.0 * inter as f64 / union as f64
    })
}

/// Per-class counts `(|R_i|, |G_i|, |R_i ∩ G_i|)` for classes `1..=n`.
fn class_counts(result: &LabelMap, gt: &LabelMap) -> Vec<(usize, usize, usize)> {
    let n = result.num_classes().max(gt.num_classes()) as usize;
    let mut counts = vec![(0, 0, 0); n + 1];
    for (&r, &g) in result.labels().iter().zip(gt.labels()) {
        counts[r as usize].0 += 1;
        counts[g as usize].1 += 1;
        if r == g {
            counts[r as usize].2 += 1;
        }
    }
    counts.remove(0);
    counts
}

/// Mean per-class Dice score `2|R_i ∩ G_i| / (|R_i| + |G_i|)` ×100 over the
/// classes `1..=max(K_R, K_G)`. A class absent from both maps scores 100.
pub fn dice(result: &LabelMap, gt: &LabelMap) -> Result<f64> {
    check_pair(result, gt)?;
    check_total(result)?;
    check_total(gt)?;
    let counts = class_counts(result, gt);
    let sum: f64 = counts
        .iter()
        .map(|&(r, g, i)| {
            if r + g == 0 {
                1.0
            } else {
                2.0 * i as f64 / (r + g) as f64
            }
        })
        .sum();
    Ok(100.0 * sum / counts.len() as f64)
}

/// `100 Σ_i 2|R_i ∩ G_i| / |R_i ∪ G_i|`, without averaging. Not bounded by
/// 100; kept for comparison against the plain Dice mean.
pub fn dice_literal(result: &LabelMap, gt: &LabelMap) -> Result<f64> {
    check_pair(result, gt)?;
    check_total(result)?;
    check_total(gt)?;
    let sum: f64 = class_counts(result, gt)
        .iter()
        .filter(|&&(r, g, _)| r + g > 0)
        .map(|&(r, g, i)| 2.0 * i as f64 / (r + g - i) as f64)
        .sum();
    Ok(100.0 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strip(labels: &[ClassId]) -> LabelMap {
        LabelMap::new(labels.len() as u32, 1, labels.to_vec()).unwrap()
    }

    fn split(w: u32, h: u32, at: u32) -> LabelMap {
        LabelMap::from_fn(w, h, |x, _| if x < at { 1 } else { 2 }).unwrap()
    }

    /// Direct evaluation of the min/max ratio: brute-force borders, brute-force
    /// nearest-border distances, then the two sums.
    fn brute_boundary(a: &LabelMap, b: &LabelMap, radius: u32) -> f64 {
        let (w, h) = (a.width() as i64, a.height() as i64);
        let border = |m: &LabelMap| -> Vec<(i64, i64)> {
            let mut out = Vec::new();
            for y in 0..h {
                for x in 0..w {
                    let here = m.get(x as u32, y as u32);
                    let differs = [(-1, 0), (1, 0), (0, -1), (0, 1)].iter().any(|&(dx, dy)| {
                        let (nx, ny) = (x + dx, y + dy);
                        nx >= 0
                            && ny >= 0
                            && nx < w
                            && ny < h
                            && m.get(nx as u32, ny as u32) != here
                    });
                    if differs {
                        out.push((x, y));
                    }
                }
            }
            out
        };
        let member = |set: &[(i64, i64)], x: i64, y: i64| -> f64 {
            let d = set
                .iter()
                .map(|&(bx, by)| (((bx - x).pow(2) + (by - y).pow(2)) as f64).sqrt())
                .fold(f64::INFINITY, f64::min);
            (1.0 - d / (radius as f64 + 1.0)).max(0.0)
        };
        let (ba, bb) = (border(a), border(b));
        let (mut lo, mut hi) = (0.0, 0.0);
        for y in 0..h {
            for x in 0..w {
                let (ma, mb) = (member(&ba, x, y), member(&bb, x, y));
                lo += ma.min(mb);
                hi += ma.max(mb);
            }
        }
        if hi == 0.0 {
            100.0
        } else {
            100.0 * lo / hi
        }
    }

    #[test]
    fn accuracy_examples() {
        let a = strip(&[1, 2, 1, 2]);
        assert_eq!(accuracy(&a, &a).unwrap(), 100.0);
        assert_eq!(accuracy(&a, &strip(&[2, 1, 2, 1])).unwrap(), 0.0);
        let r = strip(&[1, 1, 1, 1, 1, 1, 1, 2, 2, 2]);
        let g = strip(&[1; 10]);
        let agree = r
            .labels()
            .iter()
            .zip(g.labels())
            .filter(|(a, b)| a == b)
            .count();
        assert_eq!(agree, 7);
        assert_eq!(accuracy(&r, &g).unwrap(), 70.0);
    }

    #[test]
    fn accuracy_rejects_mismatch_and_void() {
        assert!(matches!(
            accuracy(&strip(&[1, 1]), &strip(&[1, 1, 1])),
            Err(Error::DimensionMismatch(..))
        ));
        assert!(matches!(
            accuracy(&strip(&[1, 0]), &strip(&[1, 1])),
            Err(Error::VoidLabel)
        ));
    }

    #[test]
    fn border_examples() {
        let uniform = LabelMap::from_fn(4, 4, |_, _| 3).unwrap();
        assert_eq!(internal_border(&uniform).count(), 0);

        let b = internal_border(&split(4, 4, 2));
        assert_eq!(b.count(), 8);
        for y in 0..4 {
            assert!(b.contains(1, y) && b.contains(2, y));
        }

        let dot = LabelMap::from_fn(5, 4, |x, y| if (x, y) == (0, 1) { 2 } else { 1 }).unwrap();
        let b = internal_border(&dot);
        let mut got: Vec<(u32, u32)> = (0..4)
            .flat_map(|y| (0..5).map(move |x| (x, y)))
            .filter(|&(x, y)| b.contains(x, y))
            .collect();
        got.sort();
        assert_eq!(got, vec![(0, 0), (0, 1), (0, 2), (1, 1)]);
    }

    #[test]
    fn eight_connectivity_adds_diagonals() {
        let dot = LabelMap::from_fn(3, 3, |x, y| if (x, y) == (1, 1) { 2 } else { 1 }).unwrap();
        assert_eq!(internal_border(&dot).count(), 5);
        assert_eq!(internal_border_with(&dot, Connectivity::Eight).count(), 9);
    }

    #[test]
    fn boundary_examples() {
        let a = split(12, 12, 5);
        assert_eq!(boundary_accuracy(&a, &a, 4).unwrap(), 100.0);

        let far = split(12, 12, 9);
        assert_eq!(boundary_accuracy(&a, &far, 0).unwrap(), 0.0);

        let b = split(12, 12, 6);
        let got = boundary_accuracy(&a, &b, 2).unwrap();
        assert!((got - brute_boundary(&a, &b, 2)).abs() < 1e-9);
        assert!(got > 0.0 && got < 100.0);

        let u = LabelMap::from_fn(3, 3, |_, _| 1).unwrap();
        assert_eq!(boundary_accuracy(&u, &u, 0).unwrap(), 100.0);
    }

    #[test]
    fn object_examples() {
        let g = strip(&[2; 10]);
        assert_eq!(object_accuracy(&g, &g, 2).unwrap(), 100.0);
        assert_eq!(
            object_accuracy(&strip(&[2, 1]), &strip(&[1, 2]), 2).unwrap(),
            0.0
        );
        let half = strip(&[2, 2, 2, 2, 2, 1, 1, 1, 1, 1]);
        let (inter, union) = (5.0, 10.0);
        assert_eq!(
            object_accuracy(&half, &g, 2).unwrap(),
            100.0 * inter / union
        );
        assert_eq!(object_accuracy(&g, &g, 7).unwrap(), 100.0);
    }

    #[test]
    fn dice_examples() {
        let a = strip(&[1, 2, 1, 2]);
        assert_eq!(dice(&a, &a).unwrap(), 100.0);
        assert_eq!(dice(&a, &strip(&[2, 1, 2, 1])).unwrap(), 0.0);

        let g = strip(&[1, 1, 1, 1, 1, 2, 2, 2, 2, 2]);
        let r = strip(&[1, 1, 1, 1, 2, 1, 1, 2, 2, 2]);
        // set counts per class: (|R|, |G|, |R∩G|)
        let count = |c: u8| {
            let rr = r.labels().iter().filter(|&&l| l == c).count();
            let gg = g.labels().iter().filter(|&&l| l == c).count();
            let ii = r
                .labels()
                .iter()
                .zip(g.labels())
                .filter(|&(&a, &b)| a == c && b == c)
                .count();
            (rr, gg, ii)
        };
        assert_eq!(count(1), (6, 5, 4));
        assert_eq!(count(2), (4, 5, 3));
        let expected = 100.0 * (8.0 / 11.0 + 6.0 / 9.0) / 2.0;
        assert!((dice(&r, &g).unwrap() - expected).abs() < 1e-12);
        assert!((dice(&r, &g).unwrap() - 69.6969696969697).abs() < 1e-9);

        let lit = 100.0 * (8.0 / 7.0 + 6.0 / 6.0);
        assert!((dice_literal(&r, &g).unwrap() - lit).abs() < 1e-9);
    }

    #[test]
    fn dice_counts_missing_classes_as_perfect() {
        // class 2 absent from both, class 3 present in both
        let a = strip(&[1, 3, 3]);
        assert_eq!(dice(&a, &a).unwrap(), 100.0);
    }

    fn pair() -> impl Strategy<Value = (LabelMap, LabelMap)> {
        (1u32..8, 1u32..8).prop_flat_map(|(w, h)| {
            let n = (w * h) as usize;
            (
                prop::collection::vec(1u8..4, n),
                prop::collection::vec(1u8..4, n),
            )
                .prop_map(move |(a, b)| {
                    (
                        LabelMap::new(w, h, a).unwrap(),
                        LabelMap::new(w, h, b).unwrap(),
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn metric_properties((a, b) in pair(), radius in 0u32..4) {
            let all = [
                accuracy(&a, &b).unwrap(),
                boundary_accuracy(&a, &b, radius).unwrap(),
                object_accuracy(&a, &b, 1).unwrap(),
                dice(&a, &b).unwrap(),
            ];
            for v in all {
                prop_assert!((0.0..=100.0).contains(&v));
            }
            prop_assert_eq!(accuracy(&a, &b).unwrap(), accuracy(&b, &a).unwrap());
            prop_assert!((dice(&a, &b).unwrap() - dice(&b, &a).unwrap()).abs() < 1e-9);
            prop_assert_eq!(object_accuracy(&a, &b, 2).unwrap(), object_accuracy(&b, &a, 2).unwrap());
            prop_assert!((boundary_accuracy(&a, &b, radius).unwrap() - brute_boundary(&a, &b, radius)).abs() < 1e-9);

            let identical = a == b;
            prop_assert_eq!(accuracy(&a, &b).unwrap() == 100.0, identical);
            prop_assert_eq!((dice(&a, &b).unwrap() - 100.0).abs() < 1e-12, identical);
        }

        #[test]
        fn metrics_are_relabeling_invariant((a, b) in pair(), radius in 0u32..4) {
            let perm = [0u8, 3, 1, 2];
            let relabel = |m: &LabelMap| {
                LabelMap::new(m.width(), m.height(), m.labels().iter().map(|&l| perm[l as usize]).collect()).unwrap()
            };
            let (pa, pb) = (relabel(&a), relabel(&b));
            prop_assert_eq!(accuracy(&a, &b).unwrap(), accuracy(&pa, &pb).unwrap());
            prop_assert_eq!(boundary_accuracy(&a, &b, radius).unwrap(), boundary_accuracy(&pa, &pb, radius).unwrap());
            prop_assert_eq!(object_accuracy(&a, &b, 1).unwrap(), object_accuracy(&pa, &pb, 3).unwrap());
            // the class universe 1..=K is the same only when both use class 3
            let full = |m: &LabelMap| m.labels().contains(&3);
            if (full(&a) || full(&b)) && (full(&pa) || full(&pb)) {
                prop_assert!((dice(&a, &b).unwrap() - dice(&pa, &pb).unwrap()).abs() < 1e-9);
            }
        }
    }
}
