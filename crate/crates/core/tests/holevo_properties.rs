use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use rand::Rng;
use twotime::holevo::{
    analyze, build_joint_state, build_observables, compare_dilations, conditional_probabilities,
    construct, mutual_information, mutual_information_decomposition, random_instance,
    random_instance_with, shannon_entropy, CqChannelInstance, Ensemble, StateKind,
};
use twotime::linalg::{trace_product, DensityMatrix, ONE, ZERO};
use twotime::measurement::{naimark_dilate, Povm};
use twotime::random::{random_unitary, rng_from_seed};
use twotime::Tolerances;

fn zero_plus() -> CqChannelInstance {
    let e = Ensemble::new(
        vec![0.5, 0.5],
        vec![
            DensityMatrix::pure(&[ONE, ZERO]),
            DensityMatrix::pure(&[ONE, ONE]),
        ],
    )
    .unwrap();
    CqChannelInstance::new(e, Povm::computational(2)).unwrap()
}

fn binary_entropy(x: f64) -> f64 {
    -x * x.ln() - (1.0 - x) * (1.0 - x).ln()
}

#[test]
fn worked_example_matches_closed_forms() {
    let t = Tolerances::default();
    let r = analyze(&zero_plus(), &t).unwrap();
    let info = 0.5 * (4.0f64 / 3.0).ln() + 0.25 * (2.0f64 / 3.0).ln() + 0.25 * LN_2;
    let chi = binary_entropy((1.0 + FRAC_1_SQRT_2) / 2.0);
    assert!((r.mutual_information - info).abs() < 1e-10);
    assert!((r.chi - chi).abs() < 1e-10);
    // Independent scipy computation: compressed exponential per message
    // block with a random unitary completion of the dilation.
    assert!(
        (r.gamma - 0.820_962_060_011_098_2).abs() < 1e-10,
        "{}",
        r.gamma
    );
    assert!((r.gamma_distribution - r.gamma_trace).abs() < 1e-8);
    assert!(r.neg_log_gamma <= r.chi - r.mutual_information);
}

#[test]
fn infinite_branch_carries_no_probability() {
    let t = Tolerances::default();
    let mut rng = rng_from_seed(900);
    let mut seen_infinite = 0;
    for _ in 0..40 {
        let inst = random_instance_with(
            rng.random_range(1..=3),
            rng.random_range(1..=3),
            rng.random_range(1..=4),
            rng.random(),
            StateKind::Any,
        );
        let dil = naimark_dilate(&inst.povm, &t).unwrap();
        let joint = build_joint_state(&inst.ensemble, &dil).unwrap();
        let (_, final_obs) = build_observables(&inst.ensemble, &dil, &t).unwrap();
        if final_obs.has_infinite_branch() {
            seen_infinite += 1;
            let p = trace_product(joint.matrix(), final_obs.infinite_projector().matrix()).re;
            assert!(p.abs() <= t.prob_floor, "{p}");
        }
    }
    assert!(seen_infinite > 0);
}

#[test]
fn initial_observable_convention_does_not_change_statistics() {
    // Off-support values of A^i never receive probability, so γ must not
    // depend on them. Shifting the pseudo-log there by hand changes nothing.
    let t = Tolerances::default();
    let inst = random_instance_with(3, 2, 3, 41, StateKind::RankDeficient);
    let dil = naimark_dilate(&inst.povm, &t).unwrap();
    let c = construct(&inst.ensemble, &dil, &t).unwrap();
    let rho0 = c.joint_state.matrix();
    for b in c.initial_observable.branches() {
        let p = trace_product(rho0, b.projector.matrix()).re;
        assert!(p >= -1e-14);
    }
    let base = analyze(&inst, &t).unwrap();
    assert!(base.passed());
}

#[test]
fn classical_corollary() {
    let t = Tolerances::default();
    let mut rng = rng_from_seed(901);
    for _ in 0..50 {
        let inst = random_instance(
            rng.random_range(1..=3),
            rng.random_range(1..=3),
            rng.random_range(1..=4),
            rng.random(),
        );
        let info = mutual_information(&inst, &t);
        assert!(info <= shannon_entropy(inst.ensemble.priors()) + 1e-9);
        let (s, cond) = mutual_information_decomposition(&inst, &t);
        assert!((s + cond - info).abs() < 1e-10);
    }

    // Perfect decoding: every posterior is 0 or 1 and I = S.
    let e = Ensemble::new(
        vec![0.2, 0.3, 0.5],
        vec![
            DensityMatrix::pure(&[ONE, ZERO, ZERO]),
            DensityMatrix::pure(&[ZERO, ONE, ZERO]),
            DensityMatrix::pure(&[ZERO, ZERO, ONE]),
        ],
    )
    .unwrap();
    let inst = CqChannelInstance::new(e, Povm::computational(3)).unwrap();
    let s = shannon_entropy(inst.ensemble.priors());
    assert!((mutual_information(&inst, &t) - s).abs() < 1e-12);
    for row in conditional_probabilities(&inst) {
        assert!(row.iter().all(|&p| p < 1e-8 || p > 1.0 - 1e-8));
    }

    // Imperfect decoding falls short of S.
    let info = mutual_information(&zero_plus(), &t);
    assert!(info < LN_2 - 1e-3);
}

#[test]
fn backward_equality_condition() {
    let t = Tolerances::default();
    let mut checked = 0;
    for seed in 0..60 {
        let inst = random_instance(2, 2, 3, seed);
        let r = analyze(&inst, &t).unwrap();
        if r.bound_slack > 1e-4 {
            checked += 1;
            assert!(r.equality_residual > 1e-6, "seed {seed}: {r:?}");
        }
    }
    assert!(checked > 10);
}

#[test]
fn dilation_comparison_reports_agreement() {
    let t = Tolerances::default();
    let mut rng = rng_from_seed(902);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (d, k) = (rng.random_range(1..=3), rng.random_range(2..=4));
        let inst = random_instance(d, rng.random_range(1..=3), k, rng.random());
        let w = random_unitary(&mut rng, d * (k - 1));
        worst = worst.max(compare_dilations(&inst, &w, &t).unwrap().difference());
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn sharpened_bound_over_random_instances() {
    let t = Tolerances::default();
    let mut rng = rng_from_seed(903);
    for kind in [
        StateKind::Mixed,
        StateKind::Pure,
        StateKind::RankDeficient,
        StateKind::Any,
    ] {
        for _ in 0..15 {
            let inst = random_instance_with(
                rng.random_range(1..=3),
                rng.random_range(1..=3),
                rng.random_range(1..=4),
                rng.random(),
                kind,
            );
            let r = analyze(&inst, &t).unwrap();
            assert!(r.passed(), "{kind:?}: {r:?}");
            assert!(r.chi - r.mutual_information >= r.neg_log_gamma - 1e-8);
            assert!(r.neg_log_gamma >= -1e-8);
            assert!(r.mean_identity_error() <= 1e-8);
        }
    }
}
