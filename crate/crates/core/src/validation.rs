//! Built-in invariant checks, run by `cqed validate`.
//!
//! Each check is cheap (the whole suite takes a few seconds) and compares a
//! simulated quantity with a closed form or with an algebraic identity.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::config::ExperimentConfig;
use crate::decoherence::{
    damped_rabi_probability, qnd_ensemble, BathParams, InitialPhoton, ProbeConfig, QndProbe,
};
use crate::dynamics::{evolve_resonant, rabi_probability, vacuum_rabi_spectrum, CavityParams};
use crate::error::Result;
use crate::experiments::{
    cnot_truth_table, default_splitting_grid, inject_coherent, run_phase_gate_fringes,
    run_ramsey_fringes,
};
use crate::hilbert::{coherent_field, fidelity, superpose, AtomLevel, FieldState, JointState, Ket};
use crate::output::ResultTable;
use crate::pulses::{cavity_pulse, conditional_phase_gate, dispersive_interaction, ramsey_pulse, RamseyTransition};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult { name, passed: false, detail: format!("error: {e}") },
    }
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn cfg_ideal() -> ExperimentConfig {
    ExperimentConfig { ideal: true, ..ExperimentConfig::default() }
}

/// Runs every check; the caller decides how to report.
pub fn run_all() -> Vec<CheckResult> {
    let cfg = cfg_ideal();
    let omega = cfg.cavity.rabi_frequency();
    vec![
        check("norm preservation", || {
            let e = JointState::basis(AtomLevel::E, 0, 15)?;
            let g = JointState::basis(AtomLevel::G, 3, 15)?;
            let i = JointState::basis(AtomLevel::I, 1, 15)?;
            let s = superpose(&[
                (&e, Complex64::new(0.3, 0.1)),
                (&g, Complex64::new(-0.5, 0.2)),
                (&i, Complex64::new(0.0, 0.7)),
            ])?;
            let ops = [
                evolve_resonant(&s, omega, 1.7e-6)?,
                ramsey_pulse(&s, RamseyTransition::Eg, 0.4),
                ramsey_pulse(&s, RamseyTransition::Gi, 2.1),
                dispersive_interaction(&s, 0.9),
            ];
            let worst = ops.iter().map(|o| (o.norm_sqr() - 1.0).abs()).fold(0.0, f64::max);
            Ok((worst < 1e-12, format!("max |norm - 1| = {worst:e}")))
        }),
        check("Rabi probability closed form", || {
            let e0 = JointState::basis(AtomLevel::E, 0, 15)?;
            let period = 2.0 * PI / omega;
            let mut worst = 0.0f64;
            for k in 0..1000 {
                let t = 3.0 * period * k as f64 / 999.0;
                let p = evolve_resonant(&e0, omega, t)?.level_probability(AtomLevel::E);
                worst = worst.max((p - rabi_probability(omega, t)).abs());
            }
            Ok((worst < 1e-12, format!("max deviation {worst:e}")))
        }),
        check("ladder revival times", || {
            let mut worst = 0.0f64;
            for n in 0..=5 {
                let s = JointState::basis(AtomLevel::E, n, 15)?;
                let t = 2.0 * PI / (omega * ((n + 1) as f64).sqrt());
                let out = evolve_resonant(&s, omega, t)?;
                worst = worst.max((out.amplitude(AtomLevel::E, n) + 1.0).norm());
            }
            Ok((worst < 1e-10, format!("max deviation from -|e,n> {worst:e}")))
        }),
        check("mode splitting", || {
            let grid = default_splitting_grid(&cfg)?;
            let empty = vacuum_rabi_spectrum(&cfg.cavity, false, &grid)?;
            let atom = vacuum_rabi_spectrum(&cfg.cavity, true, &grid)?;
            let peaks = atom.local_maxima();
            let centered = empty.frequencies[empty.argmax()] == cfg.cavity.omega;
            let ok = peaks.len() == 2
                && ((atom.detunings[peaks[1]] - atom.detunings[peaks[0]]) - 2.0 * cfg.cavity.g0).abs()
                    <= grid.step()
                && centered;
            Ok((ok, format!("{} peaks, empty line centered: {centered}", peaks.len())))
        }),
        check("pulse algebra", || {
            let e0 = JointState::basis(AtomLevel::E, 0, 15)?;
            let g0 = JointState::basis(AtomLevel::G, 0, 15)?;
            let g1 = JointState::basis(AtomLevel::G, 1, 15)?;
            let half = cavity_pulse(&e0, FRAC_PI_2, omega)?;
            let target = superpose(&[(&e0, Complex64::new(1.0, 0.0)), (&g1, Complex64::new(1.0, 0.0))])?;
            let d1 = max_abs_diff(half.amplitudes(), target.amplitudes());
            let d2 = max_abs_diff(cavity_pulse(&g1, 2.0 * PI, omega)?.amplitudes(), g1.with_global_phase(PI).amplitudes());
            let d3 = max_abs_diff(cavity_pulse(&g0, 2.0 * PI, omega)?.amplitudes(), g0.amplitudes());
            let worst = d1.max(d2).max(d3);
            Ok((worst < 1e-12, format!("max deviation {worst:e}")))
        }),
        check("dispersive shift of a coherent field", || {
            let alpha = Complex64::new(0.8, 0.3);
            let eps = 0.37;
            let field = coherent_field(alpha, 15)?;
            let s = JointState::product([Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], field.field())?;
            let shifted = dispersive_interaction(&s, eps).conditional_field(AtomLevel::G).expect("atom stays in g");
            let target = coherent_field(alpha * Complex64::from_polar(1.0, -eps), 15)?;
            let f = fidelity(&shifted, target.field())?;
            Ok((f > 1.0 - 1e-9, format!("fidelity {f}")))
        }),
        check("2π pulse equals the phase gate", || {
            let mut worst = 0.0f64;
            for level in [AtomLevel::G, AtomLevel::I] {
                for n in 0..2 {
                    let s = JointState::basis(level, n, 15)?;
                    let a = cavity_pulse(&s, 2.0 * PI, omega)?;
                    let b = conditional_phase_gate(&s, PI)?;
                    worst = worst.max(max_abs_diff(a.amplitudes(), b.amplitudes()));
                }
            }
            Ok((worst < 1e-12, format!("max deviation {worst:e}")))
        }),
        check("CNOT truth table", || {
            let rows = cnot_truth_table(&cfg)?;
            let flips = rows.iter().all(|r| {
                let flipped = r.target_in != r.target_out;
                flipped == (r.control_in == 1) && r.control_in == r.control_out
            });
            Ok((flips, format!("{} rows", rows.len())))
        }),
        check("phase-gate fringe shift", || {
            let t = run_phase_gate_fringes(&cfg)?;
            let shift = meta_f64(&t, "fringe_shift");
            Ok(((shift - PI).abs() < 1e-6, format!("shift {shift}")))
        }),
        check("Ramsey fringes against 2x2 oracle", || {
            let t = run_ramsey_fringes(&cfg)?;
            let worst = column_diff(&t, "p_e", "p_e_oracle");
            Ok((worst < 1e-12, format!("max deviation {worst:e}")))
        }),
        check("probe truth table", || {
            let probe = QndProbe::new(&ProbeConfig::ideal(1e-3)?)?;
            let (p0, p1) = (probe.excited_probability(0), probe.excited_probability(1));
            Ok((p0 < 1e-12 && p1 > 1.0 - 1e-12, format!("P(e|0) = {p0:e}, P(e|1) = {p1}")))
        }),
        check("damped Rabi envelope", || {
            let t2 = 3e-5;
            let mut worst = 0.0f64;
            for k in 0..20 {
                let t = 2.0 * PI * k as f64 / omega;
                let p = damped_rabi_probability(t, omega, t2)?;
                worst = worst.max((p - (0.5 + 0.5 * (-t / t2).exp())).abs());
            }
            Ok((worst < 1e-9, format!("max deviation {worst:e}")))
        }),
        check("coherent injection into vacuum", || {
            let beta = Complex64::new(0.3, -0.2);
            let out = inject_coherent(&FieldState::vacuum(15)?, beta)?;
            let f = fidelity(&out, coherent_field(beta, 15)?.field())?;
            Ok((f > 1.0 - 1e-9, format!("fidelity {f}")))
        }),
        check("CSV round trip", || {
            let values = vec![0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, FRAC_1_SQRT_2];
            let mut t = ResultTable::new();
            t.push_column("x", values.clone())?;
            let back = ResultTable::read_csv(t.to_csv_string().as_bytes())
                .map_err(|e| crate::error::CqedError::param("csv", e.to_string()))?;
            let same = back.column("x").is_some_and(|c| c.iter().zip(&values).all(|(a, b)| a.to_bits() == b.to_bits()));
            Ok((same, "bit-exact".into()))
        }),
        check("QND occupancy", || {
            let bath = BathParams::new(1.0 / 0.13, 0.05)?;
            let probe = ProbeConfig::ideal(0.01)?;
            let s = qnd_ensemble(&bath, &probe, 2.0, 2000, 7, InitialPhoton::Stationary)?;
            let z = (s.mean_occupancy - 0.05) / s.occupancy_std_error;
            Ok((z.abs() < 4.0, format!("occupancy {} (z = {z:.2})", s.mean_occupancy)))
        }),
        check("default parameters", || {
            let p: CavityParams = cfg.cavity;
            p.validate()?;
            Ok((p.coupling_regime().strong, format!("g0/kappa = {:.3e}", p.coupling_regime().g0_over_kappa)))
        }),
    ]
}

fn meta_f64(t: &ResultTable, key: &str) -> f64 {
    t.metadata_value(key).and_then(|v| v.parse().ok()).unwrap_or(f64::NAN)
}

fn column_diff(t: &ResultTable, a: &str, b: &str) -> f64 {
    match (t.column(a), t.column(b)) {
        (Some(x), Some(y)) => x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max),
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn every_check_passes() {
        for c in super::run_all() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
