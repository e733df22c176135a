//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use scis_core::{ClassId, Descriptor, LabelMap};

pub fn kernel(a: &[f64; 5], b: &[f64; 5], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Exact solution of a small binary C-SVM dual, found by enumerating every
/// assignment of each `α_i` to {0, C, free}, solving the equality-constrained
/// stationarity system on the free set, and keeping the best feasible point.
pub struct QpSolution {
    pub alpha: Vec<f64>,
    pub objective: f64,
    pub bias: f64,
}

pub fn dual_objective(x: &[[f64; 5]], y: &[f64], alpha: &[f64], gamma: f64) -> f64 {
    let n = x.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel(&x[i], &x[j], gamma);
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

pub fn qp_oracle(x: &[[f64; 5]], y: &[f64], c: f64, gamma: f64) -> QpSolution {
    let n = x.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * kernel(&x[i], &x[j], gamma));
    let eps = 1e-10 * c.max(1.0);
    let mut best: Option<(f64, Vec<f64>)> = None;

    let faces = 3usize.pow(n as u32);
    for code in 0..faces {
        // state per variable: 0 → at 0, 1 → at C, 2 → free
        let mut state = vec![0u8; n];
        let mut rest = code;
        for s in state.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state
            .iter()
            .map(|&s| if s == 1 { c } else { 0.0 })
            .collect();

        if free.is_empty() {
            let balance: f64 = alpha.iter().zip(y).map(|(a, yi)| a * yi).sum();
            if balance.abs() > eps {
                continue;
            }
        } else {
            // [Q_FF  y_F] [α_F]   [1 − Q_FU C]
            // [y_Fᵀ  0  ] [β  ] = [−C Σ_U y  ]
            let m = free.len();
            let mut a = DMatrix::zeros(m + 1, m + 1);
            let mut rhs = DVector::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = q[(i, j)];
                }
                a[(r, m)] = y[i];
                a[(m, r)] = y[i];
                rhs[r] = 1.0
                    - (0..n)
                        .filter(|&j| state[j] == 1)
                        .map(|j| q[(i, j)] * c)
                        .sum::<f64>();
            }
            rhs[m] = -(0..n)
                .filter(|&j| state[j] == 1)
                .map(|j| y[j] * c)
                .sum::<f64>();
            let Some(sol) = a.lu().solve(&rhs) else {
                continue;
            };
            if !free
                .iter()
                .enumerate()
                .all(|(r, _)| sol[r] > -eps && sol[r] < c + eps)
            {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r].clamp(0.0, c);
            }
        }
        let obj = dual_objective(x, y, &alpha, gamma);
        if best.as_ref().is_none_or(|(b, _)| obj > *b) {
            best = Some((obj, alpha));
        }
    }
    let (objective, alpha) = best.expect("α = 0 is always feasible");
    let bias = oracle_bias(x, y, &alpha, c, gamma);
    QpSolution {
        alpha,
        objective,
        bias,
    }
}

/// Bias from KKT: with `G_i = y_i Σ_j α_j y_j K_ij − 1`, free variables share
/// `y_i G_i = ρ`; otherwise `ρ` is the midpoint of the interval allowed by
/// the bound variables. Returns `−ρ`.
pub fn oracle_bias(x: &[[f64; 5]], y: &[f64], alpha: &[f64], c: f64, gamma: f64) -> f64 {
    let n = x.len();
    let eps = 1e-9 * c.max(1.0);
    let grad: Vec<f64> = (0..n)
        .map(|i| {
            y[i] * (0..n)
                .map(|j| alpha[j] * y[j] * kernel(&x[i], &x[j], gamma))
                .sum::<f64>()
                - 1.0
        })
        .collect();
    let free: Vec<f64> = (0..n)
        .filter(|&i| alpha[i] > eps && alpha[i] < c - eps)
        .map(|i| y[i] * grad[i])
        .collect();
    if !free.is_empty() {
        return -free.iter().sum::<f64>() / free.len() as f64;
    }
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let yg = y[i] * grad[i];
        let at_upper = alpha[i] >= c - eps;
        // the side of ρ each bound variable constrains depends on y and bound
        if at_upper == (y[i] < 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    -(ub + lb) / 2.0
}

pub fn oracle_decision(
    x: &[[f64; 5]],
    y: &[f64],
    sol: &QpSolution,
    probe: &[f64; 5],
    gamma: f64,
) -> f64 {
    x.iter()
        .zip(y)
        .zip(&sol.alpha)
        .map(|((xi, yi), a)| a * yi * kernel(xi, probe, gamma))
        .sum::<f64>()
        + sol.bias
}

/// One-vs-one prediction from oracle binaries keyed by ascending class pair.
pub fn oracle_predict(classes: &[ClassId], decisions: &[((ClassId, ClassId), f64)]) -> ClassId {
    let mut votes = vec![0usize; classes.len()];
    for &((a, b), f) in decisions {
        let winner = if f <= 0.0 { a } else { b };
        votes[classes.iter().position(|&c| c == winner).unwrap()] += 1;
    }
    let mut best = 0;
    for k in 1..classes.len() {
        if votes[k] > votes[best] {
            best = k;
        }
    }
    classes[best]
}

pub fn random_point(rng: &mut ChaCha8Rng) -> [f64; 5] {
    std::array::from_fn(|_| rng.random::<f64>())
}

pub fn descriptors(x: &[[f64; 5]]) -> Vec<Descriptor> {
    x.iter().map(|&v| Descriptor(v)).collect()
}

/// Crisp internal border by direct neighbor comparison.
pub fn brute_border(m: &LabelMap) -> Vec<bool> {
    let (w, h) = (m.width() as i64, m.height() as i64);
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let here = m.get(x as u32, y as u32);
            out.push([(-1, 0), (1, 0), (0, -1), (0, 1)].iter().any(|&(dx, dy)| {
                let (nx, ny) = (x + dx, y + dy);
                nx >= 0 && ny >= 0 && nx < w && ny < h && m.get(nx as u32, ny as u32) != here
            }));
        }
    }
    out
}

/// Min/max ratio over fuzzy borders, membership from brute-force nearest
/// border distance.
pub fn brute_boundary(a: &LabelMap, b: &LabelMap, radius: u32) -> f64 {
    let w = a.width() as i64;
    let n = a.len() as i64;
    let fuzzy = |border: &[bool]| -> Vec<f64> {
        (0..n)
            .map(|p| {
                let d = (0..n)
                    .filter(|&q| border[q as usize])
                    .map(|q| {
                        ((((p % w) - (q % w)).pow(2) + ((p / w) - (q / w)).pow(2)) as f64).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min);
                (1.0 - d / (radius as f64 + 1.0)).max(0.0)
            })
            .collect()
    };
    let (fa, fb) = (fuzzy(&brute_border(a)), fuzzy(&brute_border(b)));
    let lo: f64 = fa.iter().zip(&fb).map(|(p, q)| p.min(*q)).sum();
    let hi: f64 = fa.iter().zip(&fb).map(|(p, q)| p.max(*q)).sum();
    if hi == 0.0 {
        100.0
    } else {
        100.0 * (lo / hi)
    }
}

/// Jaccard ×100 of two crisp sets; two empty sets give 100.
pub fn jaccard(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(p, q)| **p && **q).count();
    let union = a.iter().zip(b).filter(|(p, q)| **p || **q).count();
    if union == 0 {
        100.0
    } else {
        100.0 * inter as f64 / union as f64
    }
}
