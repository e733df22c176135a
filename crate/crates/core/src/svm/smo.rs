//! SMO solver for the binary C-SVM dual
//!
//! ```text
//! min_α  ½ αᵀQα − eᵀα    s.t.  0 ≤ α_i ≤ C,  yᵀα = 0,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! Each step picks the maximal violating pair (first-order working-set
//! selection) and solves the two-variable subproblem analytically. The loop
//! stops once the violation `m(α) − M(α)` drops below the tolerance.

use crate::descriptor::Descriptor;

use super::rbf_kernel;

const TAU: f64 = 1e-12;

pub(crate) struct BinarySolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Lazily filled kernel rows, one per sample.
struct KernelCache<'a> {
    x: &'a [Descriptor],
    gamma: f64,
    rows: Vec<Option<Box<[f64]>>>,
}

impl<'a> KernelCache<'a> {
    fn new(x: &'a [Descriptor], gamma: f64) -> Self {
        Self {
            x,
            gamma,
            rows: vec![None; x.len()],
        }
    }

    fn fill(&mut self, i: usize) {
        let (x, gamma) = (self.x, self.gamma);
        self.rows[i]
            .get_or_insert_with(|| x.iter().map(|xj| rbf_kernel(&x[i], xj, gamma)).collect());
    }

    fn rows(&mut self, i: usize, j: usize) -> (&[f64], &[f64]) {
        self.fill(i);
        self.fill(j);
        let rows = &self.rows;
        (
            rows[i].as_deref().unwrap_or_default(),
            rows[j].as_deref().unwrap_or_default(),
        )
    }
}

/// `y` holds ±1 labels; both signs must be present.
pub(crate) fn solve(
    x: &[Descriptor],
    y: &[f64],
    c: f64,
    gamma: f64,
    tolerance: f64,
    max_iterations: usize,
) -> BinarySolution {
    let n = x.len();
    let mut cache = KernelCache::new(x, gamma);
    let mut alpha = vec![0.0; n];
    // gradient of the objective: G = Qα − e
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iterations {
        let Some((i, j)) = select_pair(&alpha, &grad, y, c, tolerance) else {
            converged = true;
            break;
        };
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (row_i, row_j) = cache.rows(i, j);
        let k_ij = row_i[j];
        // K(x, x) = 1 for the RBF kernel
        if y[i] != y[j] {
            let quad = positive(2.0 + 2.0 * k_ij);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = positive(2.0 - 2.0 * k_ij);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        let (yi, yj) = (y[i], y[j]);
        for k in 0..n {
            grad[k] += y[k] * (yi * row_i[k] * di + yj * row_j[k] * dj);
        }
    }

    BinarySolution {
        bias: -threshold(&alpha, &grad, y, c),
        alpha,
        iterations,
        converged,
    }
}

fn positive(quad: f64) -> f64 {
    if quad > 0.0 {
        quad
    } else {
        TAU
    }
}

fn in_up(a: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
}

fn in_low(a: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && a > 0.0) || (y < 0.0 && a < c)
}

/// Maximal violating pair, or `None` once the KKT gap is below `tolerance`.
/// Ties keep the lowest index.
fn select_pair(
    alpha: &[f64],
    grad: &[f64],
    y: &[f64],
    c: f64,
    tolerance: f64,
) -> Option<(usize, usize)> {
    let mut up = (f64::NEG_INFINITY, usize::MAX);
    let mut low = (f64::NEG_INFINITY, usize::MAX);
    for t in 0..alpha.len() {
        let score = -y[t] * grad[t];
        if in_up(alpha[t], y[t], c) && score > up.0 {
            up = (score, t);
        }
        if in_low(alpha[t], y[t], c) && -score > low.0 {
            low = (-score, t);
        }
    }
    if up.1 == usize::MAX || low.1 == usize::MAX || up.0 + low.0 < tolerance {
        None
    } else {
        Some((up.1, low.1))
    }
}

/// `ρ` such that `f(x) = Σ α_i y_i K(x_i, x) − ρ`: the mean of `y_i G_i` over
/// free variables, or the midpoint of the feasible interval when none is free.
fn threshold(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
