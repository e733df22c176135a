//! Multiclass C-SVM with an RBF kernel.
//!
//! One binary machine is trained per unordered class pair `(a, b)` with
//! `a < b`. Inside a pair, class `a` is the negative class: a decision value
//! `f(x) ≤ 0` votes for `a`, `f(x) > 0` votes for `b`. The class collecting
//! the most votes wins, ties going to the smallest class id.

mod smo;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::descriptor::Descriptor;
use crate::error::{Error, Result};
use crate::raster::ClassId;

const FORMAT_NAME: &str = "scis-svm";
const FORMAT_VERSION: u32 = 1;

/// `exp(−γ‖x − y‖²)`.
pub fn rbf_kernel(x: &Descriptor, y: &Descriptor, gamma: f64) -> f64 {
    (-gamma * x.squared_distance(y)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Box constraint on the dual variables.
    pub c: f64,
    /// RBF width.
    pub gamma: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tolerance: f64,
    /// Cap on SMO steps per binary subproblem.
    pub max_iterations: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 4.0,
            gamma: 4.0,
            tolerance: 1e-3,
            max_iterations: 10_000_000,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("C must be > 0, got {}", self.c));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be >= 0, got {}", self.gamma));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad(format!("tolerance must be > 0, got {}", self.tolerance));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be >= 1".into());
        }
        Ok(())
    }
}

/// Decision function of one class pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryModel {
    /// `(negative class, positive class)`, ascending.
    pub class_pair: (ClassId, ClassId),
    pub support_vectors: Vec<Descriptor>,
    /// `α_i y_i` for each support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    /// SMO steps taken.
    pub iterations: usize,
    pub converged: bool,
}

impl BinaryModel {
    pub fn decision_value(&self, x: &Descriptor, gamma: f64) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, coef)| coef * rbf_kernel(sv, x, gamma))
            .sum::<f64>()
            + self.bias
    }

    /// Winning class of this pair for `x`.
    pub fn vote(&self, x: &Descriptor, gamma: f64) -> ClassId {
        if self.decision_value(x, gamma) <= 0.0 {
            self.class_pair.0
        } else {
            self.class_pair.1
        }
    }

    /// Dual objective `Σα − ½ ΣΣ α_i α_j y_i y_j K(x_i, x_j)` (non-support
    /// vectors have `α = 0` and drop out).
    pub fn dual_objective(&self, gamma: f64) -> f64 {
        let linear: f64 = self.dual_coefs.iter().map(|c| c.abs()).sum();
        let mut quad = 0.0;
        for (si, ci) in self.support_vectors.iter().zip(&self.dual_coefs) {
            for (sj, cj) in self.support_vectors.iter().zip(&self.dual_coefs) {
                quad += ci * cj * rbf_kernel(si, sj, gamma);
            }
        }
        linear - 0.5 * quad
    }
}

/// One-vs-one ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// Sorted, distinct.
    pub classes: Vec<ClassId>,
    /// One per pair, in lexicographic pair order.
    pub binaries: Vec<BinaryModel>,
    pub params: SvmParams,
}

#[derive(Serialize, Deserialize)]
struct Envelope<M> {
    format: String,
    version: u32,
    model: M,
}

impl SvmModel {
    pub fn predict(&self, x: &Descriptor) -> ClassId {
        let mut votes = vec![0usize; self.classes.len()];
        for b in &self.binaries {
            let winner = b.vote(x, self.params.gamma);
            if let Ok(pos) = self.classes.binary_search(&winner) {
                votes[pos] += 1;
            }
        }
        let mut best = 0;
        for (pos, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = pos;
            }
        }
        self.classes[best]
    }

    /// Raw `f(x)` of every binary, in pair order.
    pub fn decision_values(&self, x: &Descriptor) -> Vec<((ClassId, ClassId), f64)> {
        self.binaries
            .iter()
            .map(|b| (b.class_pair, b.decision_value(x, self.params.gamma)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&Envelope {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            model: self,
        })
        .map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Envelope<SvmModel> =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if env.format != FORMAT_NAME || env.version != FORMAT_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported model format {} v{}",
                env.format, env.version
            )));
        }
        let model = env.model;
        let k = model.classes.len();
        if k < 2 || model.binaries.len() != k * (k - 1) / 2 {
            return Err(Error::Serialization(format!(
                "{} binaries for {k} classes",
                model.binaries.len()
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Trains the one-vs-one ensemble. Labels must be ≥ 1 and span at least two
/// classes.
pub fn train(samples: &[Descriptor], labels: &[ClassId], params: &SvmParams) -> Result<SvmModel> {
    params.validate()?;
    if samples.len() != labels.len() {
        return Err(Error::InvalidParameter(format!(
            "{} samples but {} labels",
            samples.len(),
            labels.len()
        )));
    }
    if labels.contains(&0) {
        return Err(Error::InvalidParameter(
            "class id 0 is the void label".into(),
        ));
    }
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::NothingToSeparate);
    }

    let mut binaries = Vec::with_capacity(classes.len() * (classes.len() - 1) / 2);
    for (ai, &a) in classes.iter().enumerate() {
        for &b in &classes[ai + 1..] {
            let (x, y): (Vec<Descriptor>, Vec<f64>) = samples
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == a || l == b)
                .map(|(s, &l)| (*s, if l == a { -1.0 } else { 1.0 }))
                .unzip();
            let sol = smo::solve(
                &x,
                &y,
                params.c,
                params.gamma,
                params.tolerance,
                params.max_iterations,
            );
            let (support_vectors, dual_coefs) = x
                .iter()
                .zip(&y)
                .zip(&sol.alpha)
                .filter(|(_, &alpha)| alpha > 0.0)
                .map(|((s, yi), alpha)| (*s, alpha * yi))
                .unzip();
            binaries.push(BinaryModel {
                class_pair: (a, b),
                support_vectors,
                dual_coefs,
                bias: sol.bias,
                iterations: sol.iterations,
                converged: sol.converged,
            });
        }
    }

    let model = SvmModel {
        classes,
        binaries,
        params: *params,
    };
    if model.binaries.iter().all(|b| b.converged) {
        Ok(model)
    } else {
        Err(Error::NotConverged {
            iterations: model.binaries.iter().map(|b| b.iterations).sum(),
            model: Box::new(model),
        })
    }
}
