mod common;

use std::f64::consts::PI;

use cavity_qed::dynamics::{evolve_resonant, rabi_probability};
use cavity_qed::hilbert::{superpose, AtomLevel, JointState, Ket};
use num_complex::Complex64;
use proptest::prelude::*;

use common::{c, Space};

fn random_state(n_max: usize, parts: &[(f64, f64)]) -> JointState {
    let kets: Vec<JointState> = (0..parts.len())
        .map(|k| {
            let level = AtomLevel::from_index(k % 3).unwrap();
            JointState::basis(level, (k / 3) % n_max, n_max).unwrap()
        })
        .collect();
    let terms: Vec<(&JointState, Complex64)> =
        kets.iter().zip(parts).map(|(s, &(re, im))| (s, c(re, im))).collect();
    superpose(&terms).unwrap()
}

#[test]
fn matches_matrix_exponential_at_n_max_5() {
    let space = Space { n_max: 5 };
    let omega = 2.0 * PI * 94e3;
    let input = random_state(5, &[(0.3, 0.1), (-0.2, 0.5), (0.1, 0.0), (0.4, -0.3), (0.0, 0.2), (0.6, 0.1), (-0.1, -0.1)]);
    for t in [0.0, 1.3e-6, 5.3e-6, 2.0e-5, 7.7e-5] {
        let u = space.resonant(omega, t);
        let expected = u.apply(input.amplitudes());
        let got = evolve_resonant(&input, omega, t).unwrap();
        for (a, b) in got.amplitudes().iter().zip(&expected) {
            assert!((a - b).norm() < 1e-9, "t = {t}: {a} vs {b}");
        }
    }
}

#[test]
fn revival_times_follow_the_ladder() {
    let omega = 3.7;
    for n in 0..=5 {
        let s = JointState::basis(AtomLevel::E, n, 8).unwrap();
        let t = 2.0 * PI / (omega * ((n + 1) as f64).sqrt());
        let out = evolve_resonant(&s, omega, t).unwrap();
        assert!((out.amplitude(AtomLevel::E, n) + 1.0).norm() < 1e-10);
        // half way round the excitation sits entirely on |g, n+1>
        let half = evolve_resonant(&s, omega, 0.5 * t).unwrap();
        assert!((half.amplitude(AtomLevel::G, n + 1) - 1.0).norm() < 1e-10);
    }
}

#[test]
fn closed_form_on_a_fine_grid() {
    let omega = 2.0 * PI * 94e3;
    let e0 = JointState::basis(AtomLevel::E, 0, 15).unwrap();
    for k in 0..1000 {
        let t = k as f64 * 3e-5 / 999.0;
        let p = evolve_resonant(&e0, omega, t).unwrap().level_probability(AtomLevel::E);
        assert!((p - rabi_probability(omega, t)).abs() < 1e-12);
    }
}

fn amplitudes_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..12)
        .prop_filter("non-zero vector", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 0.1))
}

proptest! {
    #[test]
    fn evolution_is_unitary(parts in amplitudes_strategy(), t in 0.0f64..50.0, omega in 0.1f64..5.0) {
        let s = random_state(6, &parts);
        let out = evolve_resonant(&s, omega, t).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_composes(parts in amplitudes_strategy(), t1 in 0.0f64..20.0, t2 in 0.0f64..20.0) {
        let s = random_state(6, &parts);
        let omega = 1.9;
        let once = evolve_resonant(&s, omega, t1 + t2).unwrap();
        let twice = evolve_resonant(&evolve_resonant(&s, omega, t1).unwrap(), omega, t2).unwrap();
        for (a, b) in once.amplitudes().iter().zip(twice.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}
