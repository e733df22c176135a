//! Fuzzy borders from an exact Euclidean distance transform.

use super::BorderSet;

/// Per-pixel border membership in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyBorder {
    width: u32,
    height: u32,
    membership: Vec<f64>,
}

impl FuzzyBorder {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn membership(&self) -> &[f64] {
        &self.membership
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.membership[y as usize * self.width as usize + x as usize]
    }
}

/// `membership(p) = max(0, 1 − d(p)/(radius + 1))`, with `d` the Euclidean
/// distance from `p` to the nearest border pixel. Radius 0 gives back the
/// crisp indicator; an empty border gives all zeros.
pub fn fuzzify(border: &BorderSet, radius: u32) -> FuzzyBorder {
    let (w, h) = (border.width(), border.height());
    let scale = 1.0 / (radius as f64 + 1.0);
    let membership = squared_distance_transform(border.mask(), w as usize, h as usize)
        .into_iter()
        .map(|d2| (1.0 - d2.sqrt() * scale).max(0.0))
        .collect();
    FuzzyBorder {
        width: w,
        height: h,
        membership,
    }
}

/// Squared Euclidean distance to the nearest `true` cell, `+∞` when there is
/// none. Separable lower-envelope-of-parabolas transform, exact on the grid.
pub(crate) fn squared_distance_transform(mask: &[bool], width: usize, height: usize) -> Vec<f64> {
    let mut d: Vec<f64> = mask
        .iter()
        .map(|&b| if b { 0.0 } else { f64::INFINITY })
        .collect();
    let mut buf = Vec::new();

    for x in 0..width {
        buf.clear();
        buf.extend((0..height).map(|y| d[y * width + x]));
        let col = transform_1d(&buf);
        for (y, v) in col.into_iter().enumerate() {
            d[y * width + x] = v;
        }
    }
    for y in 0..height {
        let row = &mut d[y * width..(y + 1) * width];
        let out = transform_1d(row);
        row.copy_from_slice(&out);
    }
    d
}

/// 1-D squared distance transform of a sampled function `f`.
fn transform_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![f64::INFINITY; n];
    // parabola apexes and the boundaries between them
    let mut v = Vec::with_capacity(n);
    let mut z: Vec<f64> = Vec::with_capacity(n + 1);
    for q in 0..n {
        if f[q].is_infinite() {
            continue;
        }
        let fq = f[q] + (q * q) as f64;
        loop {
            let Some(&p) = v.last() else {
                v.push(q);
                z.clear();
                z.push(f64::NEG_INFINITY);
                break;
            };
            let p: usize = p;
            let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= *z.last().unwrap() {
                v.pop();
                z.pop();
            } else {
                v.push(q);
                z.push(s);
                break;
            }
        }
    }
    if v.is_empty() {
        return out;
    }
    z.push(f64::INFINITY);
    let mut k = 0;
    for (q, slot) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *slot = dq * dq + f[p];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(mask: &[bool], w: usize, h: usize) -> Vec<f64> {
        (0..w * h)
            .map(|p| {
                let (px, py) = ((p % w) as f64, (p / w) as f64);
                (0..w * h)
                    .filter(|&q| mask[q])
                    .map(|q| {
                        let (qx, qy) = ((q % w) as f64, (q / w) as f64);
                        (px - qx).powi(2) + (py - qy).powi(2)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    fn set(w: u32, h: u32, mask: Vec<bool>) -> BorderSet {
        BorderSet::new(w, h, mask)
    }

    #[test]
    fn radius_zero_is_crisp() {
        let mask = vec![false, true, false, false, false, true];
        let f = fuzzify(&set(3, 2, mask.clone()), 0);
        let crisp: Vec<f64> = mask.iter().map(|&b| b as u8 as f64).collect();
        assert_eq!(f.membership(), &crisp[..]);
    }

    #[test]
    fn adjacent_pixel_at_radius_one() {
        let mut mask = vec![false; 25];
        mask[12] = true;
        let f = fuzzify(&set(5, 5, mask), 1);
        assert_eq!(f.get(2, 2), 1.0);
        assert_eq!(f.get(3, 2), 0.5);
        assert_eq!(f.get(2, 1), 0.5);
        // diagonal: 1 − √2/2
        assert!((f.get(3, 3) - (1.0 - 2f64.sqrt() / 2.0)).abs() < 1e-12);
        assert_eq!(f.get(4, 2), 0.0);
    }

    #[test]
    fn empty_border_is_all_zero() {
        let f = fuzzify(&set(4, 3, vec![false; 12]), 4);
        assert!(f.membership().iter().all(|&m| m == 0.0));
    }

    proptest! {
        #[test]
        fn transform_matches_brute_force(
            (w, h, mask) in (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
                (Just(w), Just(h), prop::collection::vec(prop::bool::weighted(0.15), w * h))
            })
        ) {
            let fast = squared_distance_transform(&mask, w, h);
            let slow = brute_force(&mask, w, h);
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn membership_is_monotone_in_radius(
            mask in prop::collection::vec(prop::bool::weighted(0.1), 64),
            r in 0u32..6,
        ) {
            let b = set(8, 8, mask);
            let lo = fuzzify(&b, r);
            let hi = fuzzify(&b, r + 1);
            for (a, c) in lo.membership().iter().zip(hi.membership()) {
                prop_assert!((0.0..=1.0).contains(a));
                prop_assert!(a <= c);
            }
        }
    }
}
