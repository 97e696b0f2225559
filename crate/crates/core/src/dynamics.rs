//! Resonant Jaynes-Cummings dynamics.
//!
//! Time evolution is in the interaction picture. The vacuum Rabi frequency is
//! `Omega = 2 g0`; the manifold `{|e,n>, |g,n+1>}` rotates at `Omega sqrt(n+1)`.

use serde::{Deserialize, Serialize};

use crate::error::{CqedError, Result};
use crate::grid::Grid;
use crate::hilbert::{AtomLevel, JointState};

/// Largest tolerated amplitude on `|e, n_max>`, which has no partner in the
/// truncated ladder.
pub const LADDER_LEAK_TOLERANCE: f64 = 1e-10;

/// Ratio above which a rate counts as "much smaller" than `g0`.
pub const STRONG_COUPLING_FACTOR: f64 = 10.0;

/// Physical parameters of the atom-cavity system. All rates in rad/s or 1/s,
/// lengths in m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Mode angular frequency.
    pub omega: f64,
    /// Atom-cavity coupling at the mode center.
    pub g0: f64,
    pub q_factor: f64,
    /// Photon decay rate, `omega / q_factor`.
    pub kappa: f64,
    /// Non-resonant atomic decay rate.
    pub gamma: f64,
    /// Mode waist.
    pub waist: f64,
    /// Atomic velocity.
    pub velocity: f64,
    /// Dipole matrix element (C m).
    pub dipole: f64,
    /// Mode volume (m^3).
    pub mode_volume: f64,
    /// Cavity length crossed in the dispersive regime.
    pub cavity_length: f64,
    /// Detuning `omega - omega_eg`.
    pub delta: f64,
}

/// Strong-coupling diagnostic; never an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingRegime {
    pub g0_over_kappa: f64,
    pub g0_over_gamma: f64,
    pub strong: bool,
}

impl CavityParams {
    pub fn omega_eg(&self) -> f64 {
        self.omega - self.delta
    }

    /// Vacuum Rabi frequency `Omega = 2 g0`.
    pub fn rabi_frequency(&self) -> f64 {
        2.0 * self.g0
    }

    pub fn interaction_time(&self) -> Result<f64> {
        interaction_time(self.waist, self.velocity)
    }

    pub fn coupling_regime(&self) -> CouplingRegime {
        let g0_over_kappa = self.g0 / self.kappa;
        let g0_over_gamma = self.g0 / self.gamma;
        CouplingRegime {
            g0_over_kappa,
            g0_over_gamma,
            strong: g0_over_kappa >= STRONG_COUPLING_FACTOR
                && g0_over_gamma >= STRONG_COUPLING_FACTOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega", self.omega),
            ("q_factor", self.q_factor),
            ("waist", self.waist),
            ("velocity", self.velocity),
            ("dipole", self.dipole),
            ("mode_volume", self.mode_volume),
            ("cavity_length", self.cavity_length),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(CqedError::param(name, format!("must be > 0, got {value}")));
            }
        }
        let non_negative = [("g0", self.g0), ("kappa", self.kappa), ("gamma", self.gamma)];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(CqedError::param(name, format!("must be >= 0, got {value}")));
            }
        }
        if !self.delta.is_finite() {
            return Err(CqedError::param("delta", "must be finite"));
        }
        Ok(())
    }
}

/// `kappa = omega / Q`.
pub fn kappa_from_q(omega: f64, q_factor: f64) -> Result<f64> {
    if !(q_factor > 0.0) {
        return Err(CqedError::param("q_factor", format!("must be > 0, got {q_factor}")));
    }
    Ok(omega / q_factor)
}

/// Splitting `2 sqrt(n) g0` of the n-th rung of the ladder.
pub fn jc_splitting(n: u32, g0: f64) -> Result<f64> {
    if n < 1 {
        return Err(CqedError::param("n", "the ladder starts at n = 1"));
    }
    Ok(2.0 * f64::from(n).sqrt() * g0)
}

/// Dressed energies `(n + 3/2) omega ± sqrt(n+1) g0` (ħ = 1) of the manifold
/// `{|e,n>, |g,n+1>}`, upper first. Resonant case only.
pub fn dressed_energies(n: u32, params: &CavityParams) -> Result<(f64, f64)> {
    if params.delta != 0.0 {
        return Err(CqedError::Unsupported(format!(
            "dressed energies are computed at resonance only (delta = {})",
            params.delta
        )));
    }
    let center = (f64::from(n) + 1.5) * params.omega;
    let half = f64::from(n + 1).sqrt() * params.g0;
    Ok((center + half, center - half))
}

/// Effective resonant interaction time `sqrt(pi) w / v` across the Gaussian mode.
pub fn interaction_time(waist: f64, velocity: f64) -> Result<f64> {
    if !(waist > 0.0) {
        return Err(CqedError::param("waist", format!("must be > 0, got {waist}")));
    }
    if !(velocity > 0.0) {
        return Err(CqedError::param("velocity", format!("must be > 0, got {velocity}")));
    }
    Ok(std::f64::consts::PI.sqrt() * waist / velocity)
}

/// Resonant evolution for a time `t` at vacuum Rabi frequency `omega_rabi`.
///
/// Each manifold `{|e,n>, |g,n+1>}` is rotated by `Omega sqrt(n+1) t / 2`:
/// `|e,n> -> cos|e,n> + sin|g,n+1>` and `|g,n+1> -> cos|g,n+1> - sin|e,n>`.
/// `|g,0>` and the `i` level are untouched.
pub fn evolve_resonant(state: &JointState, omega_rabi: f64, t: f64) -> Result<JointState> {
    if !(omega_rabi.is_finite() && t.is_finite()) {
        return Err(CqedError::param("omega_rabi", "Rabi frequency and time must be finite"));
    }
    let n_max = state.n_max();
    let top = state.amplitude(AtomLevel::E, n_max).norm();
    if top > LADDER_LEAK_TOLERANCE {
        return Err(CqedError::Truncation(format!(
            "|e, {n_max}> carries amplitude {top:e}, beyond the top manifold of the truncated ladder"
        )));
    }
    let mut out = state.clone();
    let amps = out.amplitudes_mut();
    for n in 0..n_max {
        let ie = AtomLevel::E.index() * (n_max + 1) + n;
        let ig = AtomLevel::G.index() * (n_max + 1) + n + 1;
        let angle = 0.5 * omega_rabi * ((n + 1) as f64).sqrt() * t;
        let (s, c) = angle.sin_cos();
        let (ae, ag) = (amps[ie], amps[ig]);
        amps[ie] = ae * c - ag * s;
        amps[ig] = ae * s + ag * c;
    }
    Ok(out)
}

/// Probability of the atom in `e`, summed over photon numbers.
pub fn excited_probability(state: &JointState) -> f64 {
    state.level_probability(AtomLevel::E)
}

/// Closed-form `P_e = (1 + cos(Omega t)) / 2` for an atom entering in `|e,0>`.
pub fn rabi_probability(omega_rabi: f64, t: f64) -> f64 {
    0.5 * (1.0 + (omega_rabi * t).cos())
}

/// Transmission curve of the cavity probed at detunings from `omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Absolute probe frequencies (rad/s).
    pub frequencies: Vec<f64>,
    /// Probe detuning from the mode, `frequency - omega`.
    pub detunings: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl Spectrum {
    pub fn argmax(&self) -> usize {
        self.intensity
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &v)| {
                if v > best.1 {
                    (k, v)
                } else {
                    best
                }
            })
            .0
    }

    /// Indices of strict interior local maxima (plateau-safe: a flat top
    /// counts once, at its first node).
    pub fn local_maxima(&self) -> Vec<usize> {
        let y = &self.intensity;
        let mut peaks = Vec::new();
        let mut k = 1;
        while k + 1 < y.len() {
            if y[k] > y[k - 1] {
                let mut j = k;
                while j + 1 < y.len() && y[j + 1] == y[k] {
                    j += 1;
                }
                if j + 1 < y.len() && y[j + 1] < y[k] {
                    peaks.push(k);
                }
                k = j + 1;
            } else {
                k += 1;
            }
        }
        peaks
    }
}

fn lorentzian(x: f64, center: f64, half_width: f64) -> f64 {
    let u = (x - center) / half_width;
    1.0 / (1.0 + u * u)
}

/// Phenomenological transmission spectrum.
///
/// Empty cavity: a unit-height Lorentzian at `omega` with half-width
/// `kappa/2`. With an atom: two Lorentzians at `omega ± g0`, half-width
/// `(kappa + gamma)/4` each, scaled so their total area matches the empty
/// cavity. With `g0 = 0` the atom is uncoupled and the empty-cavity curve is
/// returned. `detunings` is the probe grid relative to `omega`.
pub fn vacuum_rabi_spectrum(
    params: &CavityParams,
    atom_present: bool,
    detunings: &Grid,
) -> Result<Spectrum> {
    detunings.validate()?;
    if !(params.kappa > 0.0) {
        return Err(CqedError::param("kappa", "the spectrum needs a finite linewidth (kappa > 0)"));
    }
    let g0 = params.g0;
    let empty_hw = 0.5 * params.kappa;
    let split_hw = 0.25 * (params.kappa + params.gamma);
    // Features to resolve: the doublet, or the line itself when the doublet
    // is buried inside the linewidth.
    let feature = g0.max(split_hw);
    if detunings.start > -3.0 * g0 || detunings.stop < 3.0 * g0 {
        return Err(CqedError::Grid(format!(
            "grid [{}, {}] must span at least ±3 g0 = ±{}",
            detunings.start,
            detunings.stop,
            3.0 * g0
        )));
    }
    if detunings.step() > feature / 50.0 {
        return Err(CqedError::Grid(format!(
            "grid step {} is too coarse to resolve the 2 g0 splitting (needs <= {})",
            detunings.step(),
            feature / 50.0
        )));
    }
    let offsets = detunings.values();
    let weight = params.kappa / (params.kappa + params.gamma);
    let intensity = offsets
        .iter()
        .map(|&x| {
            // an uncoupled atom leaves the cavity line untouched
            if atom_present && g0 > 0.0 {
                weight * (lorentzian(x, -g0, split_hw) + lorentzian(x, g0, split_hw))
            } else {
                lorentzian(x, 0.0, empty_hw)
            }
        })
        .collect();
    Ok(Spectrum {
        frequencies: offsets.iter().map(|x| params.omega + x).collect(),
        detunings: offsets,
        intensity,
    })
}
