mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scis_core::{train, ClassId, Descriptor, SvmModel, SvmParams};

use common::*;

fn pad(a: f64, b: f64) -> [f64; 5] {
    [a, b, 0.0, 0.0, 0.0]
}

#[test]
fn xor_layout_is_fit_exactly() {
    let x = [pad(0.0, 0.0), pad(1.0, 1.0), pad(1.0, 0.0), pad(0.0, 1.0)];
    let labels = [1, 1, 2, 2];
    let params = SvmParams::default();
    let model = train(&descriptors(&x), &labels, &params).unwrap();

    let y: Vec<f64> = labels
        .iter()
        .map(|&l| if l == 1 { -1.0 } else { 1.0 })
        .collect();
    let sol = qp_oracle(&x, &y, params.c, params.gamma);
    for (xi, &l) in x.iter().zip(&labels) {
        assert_eq!(model.predict(&Descriptor(*xi)), l);
        let oracle_sign = oracle_decision(&x, &y, &sol, xi, params.gamma) > 0.0;
        assert_eq!(oracle_sign, l == 2);
    }
}

#[test]
fn triangle_layout_predicts_own_labels() {
    let x = [
        pad(0.1, 0.1),
        pad(0.15, 0.12),
        pad(0.9, 0.1),
        pad(0.85, 0.15),
        pad(0.5, 0.9),
        pad(0.55, 0.85),
    ];
    let labels = [1, 1, 2, 2, 3, 3];
    let params = SvmParams::default();
    let model = train(&descriptors(&x), &labels, &params).unwrap();
    assert_eq!(model.binaries.len(), 3);
    for b in &model.binaries {
        let (ca, cb) = b.class_pair;
        let (px, py): (Vec<[f64; 5]>, Vec<f64>) = x
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l == ca || l == cb)
            .map(|(xi, &l)| (*xi, if l == ca { -1.0 } else { 1.0 }))
            .unzip();
        let sol = qp_oracle(&px, &py, params.c, params.gamma);
        for (xi, yi) in px.iter().zip(&py) {
            assert!(oracle_decision(&px, &py, &sol, xi, params.gamma) * yi > 0.0);
        }
    }
    for (xi, &l) in x.iter().zip(&labels) {
        assert_eq!(model.predict(&Descriptor(*xi)), l);
    }
}

#[test]
fn free_support_vectors_sit_on_the_margin() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x: Vec<[f64; 5]> = (0..40).map(|_| random_point(&mut rng)).collect();
    let labels: Vec<ClassId> = x
        .iter()
        .map(|p| if p[0] + p[1] < 1.0 { 1 } else { 2 })
        .collect();
    let params = SvmParams::default();
    let model = train(&descriptors(&x), &labels, &params).unwrap();
    let b = &model.binaries[0];
    let mut free = 0;
    for (sv, coef) in b.support_vectors.iter().zip(&b.dual_coefs) {
        if coef.abs() < params.c {
            free += 1;
            let f = b.decision_value(sv, params.gamma);
            assert!((f.abs() - 1.0).abs() <= 10.0 * params.tolerance, "f = {f}");
        }
    }
    assert!(free > 0);
}

#[test]
fn decision_values_are_finite() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x: Vec<[f64; 5]> = (0..30).map(|_| random_point(&mut rng)).collect();
    let labels: Vec<ClassId> = (0..30).map(|i| (i % 3) as u8 + 1).collect();
    let model = train(&descriptors(&x), &labels, &SvmParams::default()).unwrap();
    for _ in 0..10_000 {
        let p = Descriptor(random_point(&mut rng));
        for (_, f) in model.decision_values(&p) {
            assert!(f.is_finite());
        }
    }
}

#[test]
fn saved_model_reproduces_decision_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let x: Vec<[f64; 5]> = (0..25).map(|_| random_point(&mut rng)).collect();
    let labels: Vec<ClassId> = (0..25).map(|i| (i % 4) as u8 + 1).collect();
    let model = train(&descriptors(&x), &labels, &SvmParams::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    let loaded = SvmModel::load(&path).unwrap();
    for _ in 0..200 {
        let p = Descriptor(random_point(&mut rng));
        for ((_, a), (_, b)) in model
            .decision_values(&p)
            .iter()
            .zip(loaded.decision_values(&p))
        {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

fn training_set() -> impl Strategy<Value = (Vec<[f64; 5]>, Vec<ClassId>)> {
    (3usize..16).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::array::uniform5(0.0f64..1.0), n),
            prop::collection::vec(1u8..=3, n),
        )
            .prop_filter("two classes", |(_, l)| l.iter().any(|&c| c != l[0]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn training_is_deterministic((x, labels) in training_set()) {
        let params = SvmParams::default();
        let a = train(&descriptors(&x), &labels, &params).unwrap();
        let b = train(&descriptors(&x), &labels, &params).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn relabeling_permutes_predictions(
        (x, labels) in training_set(),
        probes in prop::collection::vec(prop::array::uniform5(0.0f64..1.0), 20),
    ) {
        // π maps 1 → 3, 2 → 1, 3 → 2
        let pi = |c: ClassId| [0, 3, 1, 2][c as usize];
        let params = SvmParams { tolerance: 1e-9, ..SvmParams::default() };
        let a = train(&descriptors(&x), &labels, &params).unwrap();
        let relabeled: Vec<ClassId> = labels.iter().map(|&c| pi(c)).collect();
        let b = train(&descriptors(&x), &relabeled, &params).unwrap();
        for p in probes {
            let p = Descriptor(p);
            let clear_votes = a.decision_values(&p).iter().all(|(_, f)| f.abs() > 1e-6);
            let mut votes = std::collections::BTreeMap::new();
            for ((lo, hi), f) in a.decision_values(&p) {
                *votes.entry(if f <= 0.0 { lo } else { hi }).or_insert(0) += 1;
            }
            let top = votes.values().max().copied().unwrap_or(0);
            let tie_free = votes.values().filter(|&&v| v == top).count() == 1;
            if clear_votes && tie_free {
                prop_assert_eq!(b.predict(&p), pi(a.predict(&p)));
            }
        }
    }

    #[test]
    fn binary_objective_matches_oracle(
        x in prop::collection::vec(prop::array::uniform5(0.0f64..1.0), 2..7),
        signs in prop::collection::vec(any::<bool>(), 7),
        c in prop::sample::select(vec![0.25, 1.0, 4.0, 32.0]),
        gamma in prop::sample::select(vec![0.5, 4.0, 16.0]),
    ) {
        let mut labels: Vec<ClassId> = x.iter().zip(&signs).map(|(_, &s)| if s { 2 } else { 1 }).collect();
        labels[0] = 1;
        labels[1] = 2;
        let params = SvmParams { c, gamma, tolerance: 1e-9, ..SvmParams::default() };
        let model = train(&descriptors(&x), &labels, &params).unwrap();
        let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { -1.0 } else { 1.0 }).collect();
        let sol = qp_oracle(&x, &y, c, gamma);
        prop_assert!((model.binaries[0].dual_objective(gamma) - sol.objective).abs() <= 1e-6);
    }
}
