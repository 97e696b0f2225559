use std::ffi::CStr;
use std::f64::consts::PI;
use std::ptr;

use cavity_qed_ffi::*;

const OMEGA: f64 = 2.0 * PI * 94e3;

fn basis(level: u32, n: usize) -> *mut CqedState {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cqed_state_basis(level, n, 15, &mut s) }, CqedStatus::Ok);
    s
}

fn prob(s: *const CqedState, level: u32) -> f64 {
    let mut p = f64::NAN;
    assert_eq!(unsafe { cqed_state_level_probability(s, level, &mut p) }, CqedStatus::Ok);
    p
}

fn last_error() -> String {
    let p = cqed_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn pulses_through_handles() {
    let s = basis(CQED_LEVEL_E, 0);
    unsafe {
        assert_eq!(cqed_state_dim(s), 48);
        assert_eq!(cqed_cavity_pulse(s, PI / 2.0, OMEGA), CqedStatus::Ok);
        assert!((prob(s, CQED_LEVEL_E) - 0.5).abs() < 1e-12);
        assert_eq!(cqed_evolve_resonant(s, OMEGA, 0.5 / 94e3 / 2.0), CqedStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(cqed_state_amplitude(s, CQED_LEVEL_G, 1, &mut re, &mut im), CqedStatus::Ok);
        assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12);
        cqed_state_free(s);
    }
}

#[test]
fn ramsey_and_dispersive_round_trip() {
    let s = basis(CQED_LEVEL_G, 1);
    let mut copy = ptr::null_mut();
    unsafe {
        assert_eq!(cqed_state_clone(s, &mut copy), CqedStatus::Ok);
        assert_eq!(cqed_ramsey_pulse(s, CQED_RAMSEY_GI, 0.3), CqedStatus::Ok);
        assert_eq!(cqed_dispersive(s, 1.1), CqedStatus::Ok);
        assert_eq!(cqed_dispersive(s, -1.1), CqedStatus::Ok);
        assert_eq!(cqed_ramsey_pulse(s, CQED_RAMSEY_GI, 0.3 + PI), CqedStatus::Ok);
        let mut f = 0.0;
        assert_eq!(cqed_fidelity(s, copy, &mut f), CqedStatus::Ok);
        assert!((f - 1.0).abs() < 1e-12);
        assert_eq!(cqed_phase_gate(s, PI), CqedStatus::Ok);
        cqed_state_free(s);
        cqed_state_free(copy);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(cqed_state_basis(7, 0, 15, &mut s), CqedStatus::InvalidArgument);
        assert!(s.is_null());
        assert!(last_error().contains("level"));
        assert_eq!(cqed_state_basis(CQED_LEVEL_G, 0, 15, ptr::null_mut()), CqedStatus::NullPointer);
        assert_eq!(cqed_state_coherent(CQED_LEVEL_G, 3.0, 0.0, 5, &mut s), CqedStatus::Truncation);
        assert!(last_error().contains("truncation"));
        assert_eq!(cqed_evolve_resonant(ptr::null_mut(), OMEGA, 1.0), CqedStatus::NullPointer);
        let g2 = basis(CQED_LEVEL_G, 2);
        assert_eq!(cqed_phase_gate(g2, PI), CqedStatus::Subspace);
        cqed_state_free(g2);
        let ok = basis(CQED_LEVEL_G, 0);
        assert!(cqed_last_error().is_null());
        cqed_state_free(ok);
        cqed_state_free(ptr::null_mut());
    }
}

#[test]
fn measurement_collapses_the_state() {
    let s = basis(CQED_LEVEL_E, 0);
    let mut rng = ptr::null_mut();
    unsafe {
        assert_eq!(cqed_rng_new(4, 0, &mut rng), CqedStatus::Ok);
        assert_eq!(cqed_cavity_pulse(s, PI / 2.0, OMEGA), CqedStatus::Ok);
        let (mut level, mut p) = (99u32, 0.0);
        assert_eq!(cqed_measure_atom(s, rng, &mut level, &mut p), CqedStatus::Ok);
        assert!((p - 0.5).abs() < 1e-12);
        assert!((prob(s, level) - 1.0).abs() < 1e-12);
        cqed_rng_free(rng);
        cqed_state_free(s);
    }
}

#[test]
fn cnot_rows() {
    for (control, target, want) in [(0, CQED_LEVEL_G, CQED_LEVEL_G), (0, CQED_LEVEL_I, CQED_LEVEL_I), (1, CQED_LEVEL_G, CQED_LEVEL_I), (1, CQED_LEVEL_I, CQED_LEVEL_G)] {
        let (mut c, mut t, mut p) = (9u8, 9u32, 0.0);
        assert_eq!(unsafe { cqed_cnot(control, target, 0, &mut c, &mut t, &mut p) }, CqedStatus::Ok);
        assert_eq!((c, t), (control, want));
        assert!((p - 1.0).abs() < 1e-12);
    }
}

#[test]
fn trajectory_accessors() {
    let mut rng = ptr::null_mut();
    let mut traj = ptr::null_mut();
    unsafe {
        assert_eq!(cqed_rng_new(1, 2, &mut rng), CqedStatus::Ok);
        let status = cqed_qnd_trajectory(1.0 / 0.13, 0.05, PI / 2.0, 0.01, 0.0, 1.0, 2.0, 1, rng, &mut traj);
        assert_eq!(status, CqedStatus::Ok);
        let probes = cqed_trajectory_probe_count(traj);
        assert!(probes >= 200);
        for k in 0..probes {
            let (mut t, mut outcome, mut n) = (0.0, 9u32, 9u8);
            assert_eq!(cqed_trajectory_probe(traj, k, &mut t, &mut outcome, &mut n), CqedStatus::Ok);
            // ideal probe: e exactly when a photon is present
            assert_eq!(outcome == CQED_LEVEL_E, n == 1);
        }
        let jumps = cqed_trajectory_jump_count(traj);
        let mut last = -1.0;
        for k in 0..jumps {
            let (mut t, mut kind) = (0.0, 9u32);
            assert_eq!(cqed_trajectory_jump(traj, k, &mut t, &mut kind), CqedStatus::Ok);
            assert!(t > last);
            assert_eq!(kind, if k % 2 == 0 { CQED_JUMP_DEATH } else { CQED_JUMP_BIRTH });
            last = t;
        }
        let (mut t, mut kind) = (0.0, 0u32);
        assert_eq!(cqed_trajectory_jump(traj, jumps, &mut t, &mut kind), CqedStatus::OutOfRange);
        let mut occ = -1.0;
        assert_eq!(cqed_trajectory_occupancy(traj, &mut occ), CqedStatus::Ok);
        assert!((0.0..=1.0).contains(&occ));
        cqed_trajectory_free(traj);
        cqed_rng_free(rng);
    }
}

#[test]
fn version_matches_the_core_crate() {
    let v = unsafe { CStr::from_ptr(cqed_version()) };
    assert_eq!(v.to_str().unwrap(), cavity_qed::VERSION);
}
