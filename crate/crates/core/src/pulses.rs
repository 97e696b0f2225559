//! Pulse and gate algebra on [`JointState`]s.
//!
//! Ramsey zones act as classical π/2 rotations on one atomic transition,
//! identically in every photon-number sector. The sign convention is fixed:
//!
//! ```text
//! |a> -> (|a> + e^{iφ}|b>) / √2
//! |b> -> (-e^{-iφ}|a> + |b>) / √2
//! ```
//!
//! with `(a, b) = (e, g)` or `(g, i)`. The g–i zone uses the same matrix.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_resonant, CavityParams};
use crate::error::{CqedError, Result};
use crate::hilbert::{AtomLevel, JointState};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Amplitude allowed outside `{|0>, |1>}` for the phase gate.
pub const GATE_SUBSPACE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RamseyTransition {
    Eg,
    Gi,
}

impl RamseyTransition {
    /// `(a, b)` in the convention above.
    pub fn levels(self) -> (AtomLevel, AtomLevel) {
        match self {
            RamseyTransition::Eg => (AtomLevel::E, AtomLevel::G),
            RamseyTransition::Gi => (AtomLevel::G, AtomLevel::I),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PulseTransition {
    CavityEg,
    RamseyEg,
    RamseyGi,
}

/// One pulse: which transition, its rotation angle `Omega t_i`, and the
/// Ramsey phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub transition: PulseTransition,
    pub angle: f64,
    /// Ramsey phase; `None` for cavity pulses.
    pub phase: Option<f64>,
}

impl PulseSpec {
    pub fn cavity(angle: f64) -> Result<Self> {
        if !(angle >= 0.0 && angle.is_finite()) {
            return Err(CqedError::param("angle", format!("must be >= 0, got {angle}")));
        }
        Ok(Self {
            transition: PulseTransition::CavityEg,
            angle,
            phase: None,
        })
    }

    pub fn half_pi() -> Self {
        Self { transition: PulseTransition::CavityEg, angle: FRAC_PI_2, phase: None }
    }

    pub fn pi() -> Self {
        Self { transition: PulseTransition::CavityEg, angle: PI, phase: None }
    }

    pub fn two_pi() -> Self {
        Self { transition: PulseTransition::CavityEg, angle: 2.0 * PI, phase: None }
    }

    /// Ramsey π/2 pulse with phase `phi`.
    pub fn ramsey(transition: RamseyTransition, phi: f64) -> Self {
        Self {
            transition: match transition {
                RamseyTransition::Eg => PulseTransition::RamseyEg,
                RamseyTransition::Gi => PulseTransition::RamseyGi,
            },
            angle: FRAC_PI_2,
            phase: Some(phi),
        }
    }

    /// Ramsey pulse whose phase was accumulated over a delay: `phi = Δω T`.
    pub fn ramsey_after_delay(transition: RamseyTransition, delta_omega: f64, delay: f64) -> Self {
        Self::ramsey(transition, delta_omega * delay)
    }

    /// Applies the pulse. `omega_rabi` sets the duration of cavity pulses and
    /// is ignored by Ramsey zones.
    pub fn apply(&self, state: &JointState, omega_rabi: f64) -> Result<JointState> {
        let ramsey = |t: RamseyTransition| -> Result<JointState> {
            if (self.angle - FRAC_PI_2).abs() > 1e-12 {
                return Err(CqedError::Unsupported(format!(
                    "Ramsey zones are π/2 pulses; got angle {}",
                    self.angle
                )));
            }
            let phi = self
                .phase
                .ok_or_else(|| CqedError::param("phase", "Ramsey pulses need a phase"))?;
            Ok(ramsey_pulse(state, t, phi))
        };
        match self.transition {
            PulseTransition::CavityEg => {
                if self.phase.is_some() {
                    return Err(CqedError::param("phase", "cavity pulses carry no phase"));
                }
                cavity_pulse(state, self.angle, omega_rabi)
            }
            PulseTransition::RamseyEg => ramsey(RamseyTransition::Eg),
            PulseTransition::RamseyGi => ramsey(RamseyTransition::Gi),
        }
    }
}

/// Ramsey π/2 pulse on `transition` with phase `phi`.
pub fn ramsey_pulse(state: &JointState, transition: RamseyTransition, phi: f64) -> JointState {
    let (a, b) = transition.levels();
    let n_max = state.n_max();
    let fwd = Complex64::from_polar(FRAC_1_SQRT_2, phi);
    let back = Complex64::from_polar(FRAC_1_SQRT_2, -phi);
    let mut out = state.clone();
    let amps = out.amplitudes_mut();
    for n in 0..=n_max {
        let ia = a.index() * (n_max + 1) + n;
        let ib = b.index() * (n_max + 1) + n;
        let (ca, cb) = (amps[ia], amps[ib]);
        amps[ia] = ca * FRAC_1_SQRT_2 - back * cb;
        amps[ib] = fwd * ca + cb * FRAC_1_SQRT_2;
    }
    out
}

/// Resonant cavity pulse of area `angle = Omega t`.
pub fn cavity_pulse(state: &JointState, angle: f64, omega_rabi: f64) -> Result<JointState> {
    if !(omega_rabi > 0.0) {
        return Err(CqedError::param(
            "omega_rabi",
            format!("must be > 0, got {omega_rabi}"),
        ));
    }
    if !(angle >= 0.0 && angle.is_finite()) {
        return Err(CqedError::param("angle", format!("must be >= 0, got {angle}")));
    }
    evolve_resonant(state, omega_rabi, angle / omega_rabi)
}

/// Dispersive phase per photon `ε = t_i ω d² / (2 ħ ε0 V δ)` with
/// `t_i = cavity_length / velocity`.
pub fn dispersive_epsilon(params: &CavityParams) -> Result<f64> {
    if params.delta == 0.0 {
        return Err(CqedError::Unsupported(
            "dispersive phase diverges at zero detuning".into(),
        ));
    }
    if !(params.velocity > 0.0) {
        return Err(CqedError::param("velocity", "must be > 0"));
    }
    let transit = params.cavity_length / params.velocity;
    Ok(transit * params.omega * params.dipole * params.dipole
        / (HBAR * params.delta * 2.0 * EPSILON_0 * params.mode_volume))
}

/// Dispersive atom-field phase shifts:
/// `|e,n> -> e^{i(n+1)ε}|e,n>`, `|g,n> -> e^{-inε}|g,n>`, `|i,n>` unchanged.
pub fn dispersive_interaction(state: &JointState, epsilon: f64) -> JointState {
    let n_max = state.n_max();
    let mut out = state.clone();
    let amps = out.amplitudes_mut();
    for n in 0..=n_max {
        amps[AtomLevel::E.index() * (n_max + 1) + n] *=
            Complex64::from_polar(1.0, (n + 1) as f64 * epsilon);
        amps[AtomLevel::G.index() * (n_max + 1) + n] *=
            Complex64::from_polar(1.0, -(n as f64) * epsilon);
    }
    out
}

/// Parameters of the detuned interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersiveParams {
    /// Phase shift per photon (rad).
    pub epsilon: f64,
    /// Detuning (rad/s).
    pub delta: f64,
    /// Interaction time (s).
    pub t_i: f64,
    /// Rabi frequency at the atom position (rad/s).
    pub omega_r: f64,
    /// Mode frequency (rad/s).
    pub omega: f64,
}

impl DispersiveParams {
    pub fn validate(&self) -> Result<()> {
        if self.delta == 0.0 || !self.delta.is_finite() {
            return Err(CqedError::Unsupported(
                "dispersive operations need a non-zero detuning".into(),
            ));
        }
        if !self.epsilon.is_finite() {
            return Err(CqedError::param("epsilon", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetuningSign {
    Positive,
    Negative,
}

impl DetuningSign {
    fn factor(self) -> f64 {
        match self {
            DetuningSign::Positive => 1.0,
            DetuningSign::Negative => -1.0,
        }
    }
}

/// Light-shifted dressed energies (ħ = 1), upper branch first:
/// `(n+1)ω ± |δ|/2 ± s Ω(r)²(n+1)/|δ|` with `s = ±1` from `sign`.
/// Diagnostic only.
pub fn light_shift(n: u32, params: &DispersiveParams, sign: DetuningSign) -> Result<(f64, f64)> {
    params.validate()?;
    let rung = f64::from(n) + 1.0;
    let abs_delta = params.delta.abs();
    let base = rung * params.omega;
    let shift = sign.factor() * params.omega_r * params.omega_r * rung / abs_delta;
    Ok((base + 0.5 * abs_delta + shift, base - 0.5 * abs_delta - shift))
}

/// Conditional phase gate on the `{g, i} ⊗ {|0>, |1>}` qubits: `|g,1>` picks
/// up `e^{iφ}`. Components on `e` pass through unchanged.
pub fn conditional_phase_gate(state: &JointState, phi: f64) -> Result<JointState> {
    let n_max = state.n_max();
    let outside = AtomLevel::ALL
        .iter()
        .flat_map(|&l| (2..=n_max).map(move |n| (l, n)))
        .map(|(l, n)| state.amplitude(l, n).norm())
        .fold(0.0, f64::max);
    if outside > GATE_SUBSPACE_TOLERANCE {
        return Err(CqedError::Subspace { amplitude: outside });
    }
    let mut out = state.clone();
    let k = out.index(AtomLevel::G, 1);
    out.amplitudes_mut()[k] *= Complex64::from_polar(1.0, phi);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_field, fidelity, FieldState, Ket};
    use std::f64::consts::FRAC_PI_3;

    const ONE: Complex64 = Complex64::new(1.0, 0.0);
    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn basis(l: AtomLevel, n: usize) -> JointState {
        JointState::basis(l, n, 3).unwrap()
    }

    fn close(a: &JointState, b: &JointState, tol: f64) -> bool {
        a.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn ramsey_maps() {
        let s = ramsey_pulse(&basis(AtomLevel::E, 0), RamseyTransition::Eg, 0.0);
        assert!((s.amplitude(AtomLevel::E, 0).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitude(AtomLevel::G, 0).re - FRAC_1_SQRT_2).abs() < 1e-15);

        let phi = 0.77;
        let s = ramsey_pulse(&basis(AtomLevel::G, 2), RamseyTransition::Eg, phi);
        let expect_e = -Complex64::from_polar(FRAC_1_SQRT_2, -phi);
        assert!((s.amplitude(AtomLevel::E, 2) - expect_e).norm() < 1e-15);
        assert!((s.amplitude(AtomLevel::G, 2).re - FRAC_1_SQRT_2).abs() < 1e-15);

        let i1 = basis(AtomLevel::I, 1);
        assert_eq!(ramsey_pulse(&i1, RamseyTransition::Eg, 1.3), i1);
    }

    #[test]
    fn two_half_pi_pulses_compose_to_pi() {
        let e = basis(AtomLevel::E, 0);
        let s = ramsey_pulse(&ramsey_pulse(&e, RamseyTransition::Eg, 0.0), RamseyTransition::Eg, 0.0);
        assert!(close(&s, &basis(AtomLevel::G, 0), 1e-15));
        let g = basis(AtomLevel::G, 0);
        let s = ramsey_pulse(&ramsey_pulse(&g, RamseyTransition::Gi, 0.0), RamseyTransition::Gi, 0.0);
        assert!(close(&s, &basis(AtomLevel::I, 0), 1e-15));
    }

    #[test]
    fn ramsey_phase_then_phase_plus_pi_restores() {
        let e = basis(AtomLevel::E, 1);
        let g = basis(AtomLevel::G, 1);
        let s = crate::hilbert::superpose(&[(&e, Complex64::new(0.3, 0.4)), (&g, Complex64::new(-0.2, 0.5))]).unwrap();
        for phi in [0.0, 0.4, 2.0, -1.0] {
            let r = ramsey_pulse(&ramsey_pulse(&s, RamseyTransition::Eg, phi), RamseyTransition::Eg, phi + PI);
            assert!((fidelity(&r, &s).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cavity_pulse_maps() {
        let omega = 3.0;
        let (ce, cg) = (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
        let atom = JointState::product([ce, cg, ZERO], &FieldState::vacuum(3).unwrap()).unwrap();
        let out = cavity_pulse(&atom, PI, omega).unwrap();
        assert!((out.amplitude(AtomLevel::G, 1) - ce).norm() < 1e-15);
        assert!((out.amplitude(AtomLevel::G, 0) - cg).norm() < 1e-15);
        assert!(out.level_probability(AtomLevel::E) < 1e-30);

        let field = FieldState::from_amplitudes(vec![cg, ce, ZERO, ZERO]).unwrap();
        let s = JointState::product([ZERO, ONE, ZERO], &field).unwrap();
        let out = cavity_pulse(&s, PI, omega).unwrap();
        assert!((out.amplitude(AtomLevel::E, 0) + ce).norm() < 1e-15);
        assert!((out.amplitude(AtomLevel::G, 0) - cg).norm() < 1e-15);

        let out = cavity_pulse(&basis(AtomLevel::G, 1), 2.0 * PI, omega).unwrap();
        assert!((out.amplitude(AtomLevel::G, 1) + ONE).norm() < 1e-15);
        assert!(cavity_pulse(&basis(AtomLevel::G, 1), PI, 0.0).is_err());
    }

    #[test]
    fn pulse_spec_dispatch() {
        let e0 = basis(AtomLevel::E, 0);
        let via_pulse = PulseSpec::pi().apply(&e0, 2.0).unwrap();
        assert_eq!(via_pulse, cavity_pulse(&e0, PI, 2.0).unwrap());
        let delayed = PulseSpec::ramsey_after_delay(RamseyTransition::Eg, 2.0, 0.25);
        assert_eq!(delayed.phase, Some(0.5));
        assert_eq!(delayed.apply(&e0, 1.0).unwrap(), ramsey_pulse(&e0, RamseyTransition::Eg, 0.5));
        let bad = PulseSpec { phase: Some(1.0), ..PulseSpec::pi() };
        assert!(bad.apply(&e0, 1.0).is_err());
        assert!(PulseSpec::cavity(-1.0).is_err());
    }

    fn physical() -> CavityParams {
        let omega = 2.0 * PI * 51.1e9;
        CavityParams {
            omega,
            g0: 2.0 * PI * 47e3,
            q_factor: omega * 0.13,
            kappa: 1.0 / 0.13,
            gamma: 1.0 / 0.03,
            waist: 6e-3,
            velocity: 500.0,
            dipole: 1.06e-26,
            mode_volume: 7.6e-7,
            cavity_length: 2.7e-2,
            delta: 2.0 * PI * 100e3,
        }
    }

    #[test]
    fn epsilon_scaling() {
        let p = physical();
        let eps = dispersive_epsilon(&p).unwrap();
        let eps2 = dispersive_epsilon(&CavityParams { delta: 2.0 * p.delta, ..p }).unwrap();
        assert!((eps2 - eps / 2.0).abs() < 1e-15 * eps);
        let eps3 = dispersive_epsilon(&CavityParams { dipole: 2.0 * p.dipole, ..p }).unwrap();
        assert!((eps3 - 4.0 * eps).abs() < 1e-14 * eps);
        assert!(matches!(
            dispersive_epsilon(&CavityParams { delta: 0.0, ..p }),
            Err(CqedError::Unsupported(_))
        ));
    }

    #[test]
    fn epsilon_half_pi_round_trip() {
        let p = physical();
        let transit = p.cavity_length / p.velocity;
        // solve ε(δ) = π/2 for δ
        let delta = transit * p.omega * p.dipole.powi(2)
            / (2.0 * HBAR * EPSILON_0 * p.mode_volume * FRAC_PI_2);
        let eps = dispersive_epsilon(&CavityParams { delta, ..p }).unwrap();
        assert!((eps - FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn dispersive_basis_phases() {
        let g0 = basis(AtomLevel::G, 0);
        assert_eq!(dispersive_interaction(&g0, 0.7), g0);
        let out = dispersive_interaction(&basis(AtomLevel::E, 2), FRAC_PI_3);
        assert!((out.amplitude(AtomLevel::E, 2) + ONE).norm() < 1e-15);
        let i3 = basis(AtomLevel::I, 3);
        assert_eq!(dispersive_interaction(&i3, 0.9), i3);
    }

    #[test]
    fn dispersive_on_coherent_fields() {
        let n_max = 15;
        let alpha = Complex64::new(0.8, 0.3);
        let eps = 0.41;
        let field = coherent_field(alpha, n_max).unwrap();
        let g = JointState::product([ZERO, ONE, ZERO], field.field()).unwrap();
        let out = dispersive_interaction(&g, eps);
        let rotated = coherent_field(alpha * Complex64::from_polar(1.0, -eps), n_max).unwrap();
        let expect = JointState::product([ZERO, ONE, ZERO], rotated.field()).unwrap();
        assert!(fidelity(&out, &expect).unwrap() >= 1.0 - 1e-9);

        let e = JointState::product([ONE, ZERO, ZERO], field.field()).unwrap();
        let out = dispersive_interaction(&e, eps);
        let rotated = coherent_field(alpha * Complex64::from_polar(1.0, eps), n_max).unwrap();
        let expect = JointState::product([Complex64::from_polar(1.0, eps), ZERO, ZERO], rotated.field()).unwrap();
        // explicit global phase e^{iε}: compare amplitudes, not just fidelity
        let overlap: Complex64 = expect.amplitudes().iter().zip(out.amplitudes()).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap - ONE).norm() < 1e-9);
    }

    #[test]
    fn dispersive_composition_is_additive() {
        let f = coherent_field(Complex64::new(0.5, 0.2), 10).unwrap();
        let s = JointState::product([Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), ZERO], f.field()).unwrap();
        let a = dispersive_interaction(&dispersive_interaction(&s, 0.3), 0.5);
        let b = dispersive_interaction(&s, 0.8);
        assert!(close(&a, &b, 1e-14));
    }

    fn disp(omega_r: f64, delta: f64) -> DispersiveParams {
        DispersiveParams { epsilon: 0.1, delta, t_i: 1e-5, omega_r, omega: 100.0 }
    }

    #[test]
    fn light_shift_examples() {
        let (up, lo) = light_shift(2, &disp(0.0, 4.0), DetuningSign::Positive).unwrap();
        assert_eq!((up, lo), (302.0, 298.0));
        let p = disp(1.5, 4.0);
        let shift = |n: u32| {
            let (up, _) = light_shift(n, &p, DetuningSign::Positive).unwrap();
            up - (f64::from(n) + 1.0) * 100.0 - 2.0
        };
        assert!((shift(1) - 2.0 * shift(0)).abs() < 1e-12);
        let (up_pos, _) = light_shift(0, &p, DetuningSign::Positive).unwrap();
        let (up_neg, _) = light_shift(0, &p, DetuningSign::Negative).unwrap();
        assert!(((up_pos - 102.0) + (up_neg - 102.0)).abs() < 1e-12);
        assert!(light_shift(0, &disp(1.0, 0.0), DetuningSign::Positive).is_err());
    }

    #[test]
    fn phase_gate_examples() {
        let g1 = JointState::basis(AtomLevel::G, 1, 1).unwrap();
        let i1 = JointState::basis(AtomLevel::I, 1, 1).unwrap();
        let s = crate::hilbert::superpose(&[(&g1, ONE), (&i1, ONE)]).unwrap();
        let out = conditional_phase_gate(&s, PI).unwrap();
        assert!((out.amplitude(AtomLevel::G, 1).re + FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((out.amplitude(AtomLevel::I, 1).re - FRAC_1_SQRT_2).abs() < 1e-15);

        let field = FieldState::normalize(vec![ONE, ONE]).unwrap();
        let s = JointState::product([ZERO, ONE, ZERO], &field).unwrap();
        let out = conditional_phase_gate(&s, PI).unwrap();
        assert!((out.amplitude(AtomLevel::G, 0).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((out.amplitude(AtomLevel::G, 1).re + FRAC_1_SQRT_2).abs() < 1e-15);

        assert_eq!(conditional_phase_gate(&i1, 0.123).unwrap(), i1);
        assert_eq!(conditional_phase_gate(&s, 0.0).unwrap(), s);

        let g2 = basis(AtomLevel::G, 2);
        assert!(matches!(conditional_phase_gate(&g2, PI), Err(CqedError::Subspace { .. })));
    }

    #[test]
    fn phase_gate_equals_two_pi_pulse() {
        for (l, n) in [(AtomLevel::G, 0), (AtomLevel::G, 1), (AtomLevel::I, 0), (AtomLevel::I, 1)] {
            let s = basis(l, n);
            let a = conditional_phase_gate(&s, PI).unwrap();
            let b = cavity_pulse(&s, 2.0 * PI, 1.7).unwrap();
            assert!(close(&a, &b, 1e-12), "{l}{n}");
        }
    }
}
