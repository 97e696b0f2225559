//! The canonical experiments, each turned into a [`ResultTable`].
//!
//! Every run is a pure function of its [`ExperimentConfig`]. Stochastic runs
//! draw from `RngStream::substream(cfg.seed, k)` with a documented index `k`,
//! so a table's metadata is enough to reproduce it bit for bit.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decoherence::{damped_rabi_probability, qnd_ensemble, qnd_trajectory, InitialPhoton, ProbeOutcome};
use crate::dynamics::{evolve_resonant, vacuum_rabi_spectrum};
use crate::error::{CqedError, Result};
use crate::grid::Grid;
use crate::hilbert::{measure_atom, AtomLevel, FieldState, JointState, Ket};
use crate::linalg::CMatrix;
use crate::pulses::{cavity_pulse, ramsey_pulse, RamseyTransition};
use crate::rng::{RngStream, RNG_ALGORITHM};

pub use crate::config::{ExperimentConfig, ScanUnit};
pub use crate::output::ResultTable;

/// Largest population allowed to leave the truncated space during injection.
pub const INJECTION_LEAK_TOLERANCE: f64 = 1e-8;
/// Extra Fock levels used while exponentiating the displacement generator.
pub const INJECTION_PADDING: usize = 24;
/// Tolerance of the CNOT calibration check on the empty-cavity branch.
pub const CNOT_CALIBRATION_TOLERANCE: f64 = 1e-9;
/// Attempts allowed to load a photon before a shot is abandoned.
const MAX_INJECTION_RETRIES: u64 = 1000;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Experiment {
    Rabi,
    Splitting,
    Ramsey,
    PhaseGate,
    FieldPhase,
    Cnot,
    Qnd,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Rabi,
        Experiment::Splitting,
        Experiment::Ramsey,
        Experiment::PhaseGate,
        Experiment::FieldPhase,
        Experiment::Cnot,
        Experiment::Qnd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Rabi => "rabi",
            Experiment::Splitting => "splitting",
            Experiment::Ramsey => "ramsey",
            Experiment::PhaseGate => "phase-gate",
            Experiment::FieldPhase => "field-phase",
            Experiment::Cnot => "cnot",
            Experiment::Qnd => "qnd",
        }
    }

    /// Unit of the scanned variable, if the experiment has a scan.
    pub fn scan_unit(self) -> Option<ScanUnit> {
        match self {
            Experiment::Rabi => Some(ScanUnit::Seconds),
            Experiment::Splitting => Some(ScanUnit::RadPerSecond),
            Experiment::Ramsey | Experiment::PhaseGate | Experiment::FieldPhase => {
                Some(ScanUnit::Radians)
            }
            Experiment::Cnot | Experiment::Qnd => None,
        }
    }

    /// Rejects scan overrides given in the wrong unit, or given at all to an
    /// experiment without a scan.
    pub fn check_scan(self, cfg: &ExperimentConfig) -> std::result::Result<(), String> {
        let s = &cfg.scan;
        let overridden = s.start.is_some() || s.stop.is_some() || s.points.is_some();
        match (self.scan_unit(), s.unit) {
            (None, _) if overridden => Err(format!("`{}` has no scan; remove scan_* keys", self.name())),
            (Some(expected), Some(given)) if expected != given => Err(format!(
                "`{}` scans in {}, but scan_start/scan_stop are in {}",
                self.name(),
                expected.symbol(),
                given.symbol()
            )),
            _ => Ok(()),
        }
    }
}

fn scan_grid(cfg: &ExperimentConfig, default: Grid) -> Result<Grid> {
    Grid::new(
        cfg.scan.start.unwrap_or(default.start),
        cfg.scan.stop.unwrap_or(default.stop),
        cfg.scan.points.unwrap_or(default.points),
    )
}

fn base_table(cfg: &ExperimentConfig, experiment: Experiment) -> ResultTable {
    let mut t = ResultTable::new();
    t.meta("experiment", experiment.name());
    t.meta("version", crate::VERSION);
    t.meta("seed", cfg.seed);
    t.meta("ideal", cfg.ideal);
    t.meta(
        "config",
        serde_json::to_string(cfg).expect("configuration serializes"),
    );
    t
}

fn rabi_frequency(cfg: &ExperimentConfig) -> Result<f64> {
    let omega = cfg.cavity.rabi_frequency();
    if !(omega > 0.0) {
        return Err(CqedError::param("g0", "this experiment needs g0 > 0"));
    }
    Ok(omega)
}

/// Vacuum Rabi oscillation of an atom entering an empty cavity in `e`,
/// scanned over the interaction time.
///
/// Columns: `t_i`, `p_e` (unitary evolution), `p_e_damped` (contrast decaying
/// with `cfg.t2`). The π/2, π and 2π pulse durations are in the metadata.
pub fn run_rabi_scan(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let omega = rabi_frequency(cfg)?;
    let period = 2.0 * PI / omega;
    let grid = scan_grid(cfg, Grid::new(0.0, 4.0 * period, 401)?)?;
    let e0 = JointState::basis(AtomLevel::E, 0, cfg.n_max)?;
    let times = grid.values();
    let mut p_e = Vec::with_capacity(times.len());
    let mut p_damped = Vec::with_capacity(times.len());
    for &t in &times {
        p_e.push(evolve_resonant(&e0, omega, t)?.level_probability(AtomLevel::E));
        p_damped.push(damped_rabi_probability(t, omega, cfg.t2)?);
    }
    let mut table = base_table(cfg, Experiment::Rabi);
    table.push_column("t_i", times)?;
    table.push_column("p_e", p_e)?;
    table.push_column("p_e_damped", p_damped)?;
    table.meta("omega_rabi", omega);
    table.meta("t2", cfg.t2);
    table.meta("t_half_pi", 0.5 * PI / omega);
    table.meta("t_pi", PI / omega);
    table.meta("t_two_pi", 2.0 * PI / omega);
    Ok(table)
}

/// Default detuning grid: ±4 features wide, a hundred points per feature.
pub fn default_splitting_grid(cfg: &ExperimentConfig) -> Result<Grid> {
    let feature = cfg.cavity.g0.max(0.25 * (cfg.cavity.kappa + cfg.cavity.gamma));
    Grid::symmetric(4.0 * feature, 801)
}

/// Transmission with and without an atom, scanned over the probe detuning.
///
/// Columns: `frequency`, `detuning`, `intensity_empty`, `intensity_atom`.
pub fn run_mode_splitting(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let grid = scan_grid(cfg, default_splitting_grid(cfg)?)?;
    let empty = vacuum_rabi_spectrum(&cfg.cavity, false, &grid)?;
    let atom = vacuum_rabi_spectrum(&cfg.cavity, true, &grid)?;
    let mut table = base_table(cfg, Experiment::Splitting);
    table.meta("omega", cfg.cavity.omega);
    table.meta("g0", cfg.cavity.g0);
    table.meta("grid_step", grid.step());
    table.meta("empty_peak_detuning", empty.detunings[empty.argmax()]);
    let peaks = atom.local_maxima();
    if let [lo, .., hi] = peaks[..] {
        table.meta("atom_peak_separation", atom.detunings[hi] - atom.detunings[lo]);
    }
    table.meta("atom_peak_count", peaks.len());
    let regime = cfg.cavity.coupling_regime();
    table.meta("strong_coupling", regime.strong);
    table.push_column("frequency", empty.frequencies)?;
    table.push_column("detuning", empty.detunings)?;
    table.push_column("intensity_empty", empty.intensity)?;
    table.push_column("intensity_atom", atom.intensity)?;
    Ok(table)
}

fn default_phase_grid() -> Result<Grid> {
    Grid::new(0.0, 4.0 * PI, 201)
}

/// 2×2 Ramsey matrix on `(a, b)` amplitudes.
fn ramsey_matrix(phi: f64) -> [[Complex64; 2]; 2] {
    let s = FRAC_1_SQRT_2;
    [
        [Complex64::new(s, 0.0), -Complex64::from_polar(s, -phi)],
        [Complex64::from_polar(s, phi), Complex64::new(s, 0.0)],
    ]
}

fn mat2_apply(m: &[[Complex64; 2]; 2], v: [Complex64; 2]) -> [Complex64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Two Ramsey zones with no cavity in between, atom entering in `e`.
///
/// Columns: `phi`, `p_e`, `p_g`, and `p_e_oracle` from the product of the two
/// 2×2 zone matrices. With the zone convention used here, `φ = 0` sends the
/// atom to `g`.
pub fn run_ramsey_fringes(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let grid = scan_grid(cfg, default_phase_grid()?)?;
    let e = JointState::basis(AtomLevel::E, 0, cfg.n_max)?;
    let first = ramsey_pulse(&e, RamseyTransition::Eg, 0.0);
    let phis = grid.values();
    let (mut p_e, mut p_g, mut oracle) = (Vec::new(), Vec::new(), Vec::new());
    let after_first = mat2_apply(&ramsey_matrix(0.0), [ONE, ZERO]);
    for &phi in &phis {
        let s = ramsey_pulse(&first, RamseyTransition::Eg, phi);
        p_e.push(s.level_probability(AtomLevel::E));
        p_g.push(s.level_probability(AtomLevel::G));
        oracle.push(mat2_apply(&ramsey_matrix(phi), after_first)[0].norm_sqr());
    }
    let contrast = p_e.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - p_e.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut table = base_table(cfg, Experiment::Ramsey);
    table.meta("contrast", contrast);
    table.push_column("phi", phis)?;
    table.push_column("p_e", p_e)?;
    table.push_column("p_g", p_g)?;
    table.push_column("p_e_oracle", oracle)?;
    Ok(table)
}

/// Least-squares fit of `A + B cos(φ − φ0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub offset: f64,
    pub amplitude: f64,
    /// In `[0, 2π)`.
    pub phase: f64,
    pub rms_residual: f64,
}

/// Fits `A + c cos φ + s sin φ` by linear least squares; `B = hypot(c, s)`
/// and `φ0 = atan2(s, c)`.
pub fn fit_fringe(phi: &[f64], y: &[f64]) -> Result<FringeFit> {
    if phi.len() != y.len() {
        return Err(CqedError::DimensionMismatch { left: phi.len(), right: y.len() });
    }
    if phi.len() < 3 {
        return Err(CqedError::param("phi", "a fringe fit needs at least 3 points"));
    }
    let rows: Vec<[f64; 3]> = phi.iter().map(|&p| [1.0, p.cos(), p.sin()]).collect();
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (r, &v) in rows.iter().zip(y) {
        for i in 0..3 {
            aty[i] += r[i] * v;
            for j in 0..3 {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    let [a, c, s] = solve3(ata, aty)
        .ok_or_else(|| CqedError::param("phi", "scan does not determine a fringe phase"))?;
    let amplitude = c.hypot(s);
    let phase = s.atan2(c).rem_euclid(2.0 * PI);
    let sq: f64 = rows
        .iter()
        .zip(y)
        .map(|(r, &v)| (a + c * r[1] + s * r[2] - v).powi(2))
        .sum();
    Ok(FringeFit {
        offset: a,
        amplitude,
        phase,
        rms_residual: (sq / y.len() as f64).sqrt(),
    })
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / m[row][row];
    }
    Some(x)
}

/// `(φ1 − φ0)` wrapped into `[0, 2π)`.
pub fn fringe_shift(zero: &FringeFit, one: &FringeFit) -> f64 {
    (one.phase - zero.phase).rem_euclid(2.0 * PI)
}

/// Cavity with `photons ∈ {0, 1}`. One photon is loaded by an atom entering in
/// `e` and undergoing a π pulse; the returned state has that atom in `g`.
fn loaded_cavity(photons: u8, n_max: usize, omega: f64) -> Result<JointState> {
    let e0 = JointState::basis(AtomLevel::E, 0, n_max)?;
    match photons {
        0 => JointState::basis(AtomLevel::G, 0, n_max),
        1 => cavity_pulse(&e0, PI, omega),
        _ => Err(CqedError::param("photons", "the cavity is loaded with 0 or 1 photons")),
    }
}

/// The field left behind after the loading atom has been detected.
fn loaded_field(photons: u8, n_max: usize, omega: f64) -> Result<FieldState> {
    let s = loaded_cavity(photons, n_max, omega)?;
    s.conditional_field(AtomLevel::G)
        .ok_or_else(|| CqedError::Calibration("loading atom never reaches g".into()))
}

/// Second-atom sequence of the phase-gate test: `R_gi(0)`, 2π cavity pulse,
/// `R_gi(φ)`.
pub fn phase_gate_sequence(state: &JointState, phi: f64, omega: f64) -> Result<JointState> {
    let s = ramsey_pulse(state, RamseyTransition::Gi, 0.0);
    let s = cavity_pulse(&s, 2.0 * PI, omega)?;
    Ok(ramsey_pulse(&s, RamseyTransition::Gi, phi))
}

/// Ideal `P(g)` of the second atom for a cavity holding `photons`.
pub fn phase_gate_probability(photons: u8, phi: f64, cfg: &ExperimentConfig) -> Result<f64> {
    let omega = rabi_frequency(cfg)?;
    let field = loaded_field(photons, cfg.n_max, omega)?;
    let s = JointState::product([ZERO, ONE, ZERO], &field)?;
    Ok(phase_gate_sequence(&s, phi, omega)?.level_probability(AtomLevel::G))
}

/// Ramsey fringes of a g–i atom crossing the cavity with a 2π pulse, for an
/// empty cavity and for one photon.
///
/// Columns: `phi`, `p_g_0`, `p_g_1` (exact). Outside ideal mode each scan
/// point also runs `cfg.trajectories` shots on stream `substream(seed, k)`,
/// adding `p_g_0_est`, `p_g_0_err`, `p_g_1_est`, `p_g_1_err` and
/// `load_retries` (photon loads that left the first atom in `e`). Fitted
/// fringe phases and their shift are in the metadata.
pub fn run_phase_gate_fringes(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let omega = rabi_frequency(cfg)?;
    let grid = scan_grid(cfg, default_phase_grid()?)?;
    let phis = grid.values();
    let g = [ZERO, ONE, ZERO];
    let inputs = [
        JointState::product(g, &loaded_field(0, cfg.n_max, omega)?)?,
        JointState::product(g, &loaded_field(1, cfg.n_max, omega)?)?,
    ];
    let mut exact = [Vec::new(), Vec::new()];
    for &phi in &phis {
        for (col, input) in exact.iter_mut().zip(&inputs) {
            col.push(phase_gate_sequence(input, phi, omega)?.level_probability(AtomLevel::G));
        }
    }
    let fit0 = fit_fringe(&phis, &exact[0])?;
    let fit1 = fit_fringe(&phis, &exact[1])?;
    let mut table = base_table(cfg, Experiment::PhaseGate);
    table.meta("fit_phase_0", fit0.phase);
    table.meta("fit_phase_1", fit1.phase);
    table.meta("fit_contrast_0", 2.0 * fit0.amplitude);
    table.meta("fit_contrast_1", 2.0 * fit1.amplitude);
    table.meta("fringe_shift", fringe_shift(&fit0, &fit1));
    table.push_column("phi", phis.clone())?;
    let [exact0, exact1] = exact;
    table.push_column("p_g_0", exact0)?;
    table.push_column("p_g_1", exact1)?;
    if !cfg.ideal {
        let shots = cfg.trajectories;
        let mut est = [Vec::new(), Vec::new()];
        let mut err = [Vec::new(), Vec::new()];
        let mut retries_col = Vec::new();
        let load = loaded_cavity(1, cfg.n_max, omega)?;
        for (k, &phi) in phis.iter().enumerate() {
            let mut rng = RngStream::substream(cfg.seed, k as u64);
            let mut retries = 0u64;
            for photons in 0..2u8 {
                let mut hits = 0u64;
                for _ in 0..shots {
                    let field = if photons == 0 {
                        FieldState::vacuum(cfg.n_max)?
                    } else {
                        shot_load_photon(&load, &mut rng, &mut retries)?
                    };
                    let s = JointState::product(g, &field)?;
                    let out = phase_gate_sequence(&s, phi, omega)?;
                    hits += u64::from(measure_atom(&out, &mut rng)?.level == AtomLevel::G);
                }
                let (p, e) = binomial(hits, shots);
                est[usize::from(photons)].push(p);
                err[usize::from(photons)].push(e);
            }
            retries_col.push(retries as f64);
        }
        let [e0, e1] = est;
        let [s0, s1] = err;
        table.push_column("p_g_0_est", e0)?;
        table.push_column("p_g_0_err", s0)?;
        table.push_column("p_g_1_est", e1)?;
        table.push_column("p_g_1_err", s1)?;
        table.push_column("load_retries", retries_col)?;
        table.meta("shots_per_point", shots);
        table.meta("rng_algorithm", RNG_ALGORITHM);
        table.meta("rng_streams", "substream(seed, scan index)");
    }
    Ok(table)
}

/// Measures the loading atom until it is found in `g`, counting failures.
fn shot_load_photon(load: &JointState, rng: &mut RngStream, retries: &mut u64) -> Result<FieldState> {
    for _ in 0..MAX_INJECTION_RETRIES {
        let m = measure_atom(load, rng)?;
        if m.level == AtomLevel::G {
            return m
                .state
                .conditional_field(AtomLevel::G)
                .ok_or_else(|| CqedError::Calibration("empty conditional field".into()));
        }
        *retries += 1;
    }
    Err(CqedError::Calibration(format!(
        "photon loading failed {MAX_INJECTION_RETRIES} times in a row"
    )))
}

/// Sample frequency and its binomial standard error.
fn binomial(hits: u64, shots: u64) -> (f64, f64) {
    let p = hits as f64 / shots as f64;
    (p, (p * (1.0 - p) / shots as f64).sqrt())
}

/// Displaces `field` by `beta`: `exp(β a† − β* a)` is exponentiated on the
/// Fock space padded by [`INJECTION_PADDING`] levels, then projected back.
///
/// Errors if more than [`INJECTION_LEAK_TOLERANCE`] of the population ends
/// above the truncation.
pub fn inject_coherent(field: &FieldState, beta: Complex64) -> Result<FieldState> {
    if !(beta.re.is_finite() && beta.im.is_finite()) {
        return Err(CqedError::param("beta", "must be finite"));
    }
    let n_max = field.n_max();
    let dim = n_max + 1 + INJECTION_PADDING;
    let mut generator = CMatrix::zeros(dim);
    for n in 0..dim - 1 {
        let s = ((n + 1) as f64).sqrt();
        generator[(n + 1, n)] = beta * s;
        generator[(n, n + 1)] = -beta.conj() * s;
    }
    let d = generator.expm();
    let mut padded = vec![ZERO; dim];
    padded[..=n_max].copy_from_slice(&(0..=n_max).map(|n| field.amplitude(n)).collect::<Vec<_>>());
    let out = d.apply(&padded);
    let leak: f64 = out[n_max + 1..].iter().map(|a| a.norm_sqr()).sum();
    if leak > INJECTION_LEAK_TOLERANCE {
        return Err(CqedError::Truncation(format!(
            "injecting |beta| = {} leaks {leak:e} above n_max = {n_max}",
            beta.norm()
        )));
    }
    FieldState::normalize(out[..=n_max].to_vec())
}

/// Fields and probabilities of one point of the field-phase experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPhasePoint {
    /// State after the second atom's gate sequence, before its detection.
    pub after_gate: JointState,
    /// Probability of finding the second atom in `g` / `i`.
    pub p_second: [f64; 2],
    /// Field after the injection, for second atom `g` / `i`.
    pub injected: [FieldState; 2],
    /// Third-atom state after its π pulse, for second atom `g` / `i`.
    pub third: [JointState; 2],
}

impl FieldPhasePoint {
    /// `P(e)` of the third atom given the second atom's level.
    pub fn p_e(&self) -> [f64; 2] {
        [0, 1].map(|b| self.third[b].level_probability(AtomLevel::E))
    }

    /// Population with two or more photons met by the third atom, whose π
    /// pulse is exact only on one photon.
    pub fn p_two_plus(&self) -> [f64; 2] {
        [0, 1].map(|b| self.injected[b].photon_distribution().iter().skip(2).sum())
    }
}

/// Field `(|0> + |1>)/√2`, second atom in `g` through `R_gi(0)` and a 2π pulse.
pub fn field_phase_gate_state(cfg: &ExperimentConfig) -> Result<JointState> {
    let omega = rabi_frequency(cfg)?;
    let mut amps = vec![ZERO; cfg.n_max + 1];
    amps[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amps[1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let field = FieldState::from_amplitudes(amps)?;
    let s = JointState::product([ZERO, ONE, ZERO], &field)?;
    let s = ramsey_pulse(&s, RamseyTransition::Gi, 0.0);
    cavity_pulse(&s, 2.0 * PI, omega)
}

/// One value of the injection phase `theta`.
pub fn field_phase_point(cfg: &ExperimentConfig, gate: &JointState, theta: f64) -> Result<FieldPhasePoint> {
    let omega = rabi_frequency(cfg)?;
    let beta = Complex64::from_polar(cfg.field_alpha, theta);
    let mut p_second = [0.0; 2];
    let mut injected = Vec::with_capacity(2);
    let mut third = Vec::with_capacity(2);
    for (slot, level) in [AtomLevel::G, AtomLevel::I].into_iter().enumerate() {
        p_second[slot] = gate.level_probability(level);
        let field = gate
            .conditional_field(level)
            .ok_or_else(|| CqedError::Calibration(format!("second atom never found in {level}")))?;
        let field = inject_coherent(&field, beta)?;
        let s = JointState::product([ZERO, ONE, ZERO], &field)?;
        third.push(cavity_pulse(&s, PI, omega)?);
        injected.push(field);
    }
    Ok(FieldPhasePoint {
        after_gate: gate.clone(),
        p_second,
        injected: injected.try_into().expect("two branches"),
        third: third.try_into().expect("two branches"),
    })
}

/// Conditional detection of a third atom after a coherent injection of phase
/// `theta`, for the second atom found in `g` or in `i`.
///
/// Columns: `theta`, `p_e_given_g`, `p_e_given_i`, and `p_n2_given_g`,
/// `p_n2_given_i`, the population with two or more photons before the third
/// atom (its π pulse is only exact on one photon). Outside ideal mode each
/// point also runs `cfg.trajectories` shots on `substream(seed, k)`, adding
/// sampled estimates, their standard errors and the branch counts.
pub fn run_field_phase_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let grid = scan_grid(cfg, Grid::new(0.0, 2.0 * PI, 201)?)?;
    let gate = field_phase_gate_state(cfg)?;
    let thetas = grid.values();
    let mut cols: [Vec<f64>; 4] = Default::default();
    let mut shots_cols: [Vec<f64>; 6] = Default::default();
    for (k, &theta) in thetas.iter().enumerate() {
        let point = field_phase_point(cfg, &gate, theta)?;
        let p_e = point.p_e();
        let two_plus = point.p_two_plus();
        cols[0].push(p_e[0]);
        cols[1].push(p_e[1]);
        cols[2].push(two_plus[0]);
        cols[3].push(two_plus[1]);
        if !cfg.ideal {
            let mut rng = RngStream::substream(cfg.seed, k as u64);
            let mut hits = [0u64; 2];
            let mut counts = [0u64; 2];
            for _ in 0..cfg.trajectories {
                let second = measure_atom(&point.after_gate, &mut rng)?;
                let b = usize::from(second.level == AtomLevel::I);
                counts[b] += 1;
                hits[b] += u64::from(measure_atom(&point.third[b], &mut rng)?.level == AtomLevel::E);
            }
            for b in 0..2 {
                let (p, e) = if counts[b] > 0 { binomial(hits[b], counts[b]) } else { (f64::NAN, f64::NAN) };
                shots_cols[b * 3].push(p);
                shots_cols[b * 3 + 1].push(e);
                shots_cols[b * 3 + 2].push(counts[b] as f64);
            }
        }
    }
    let mut table = base_table(cfg, Experiment::FieldPhase);
    table.meta("field_alpha", cfg.field_alpha);
    table.meta("p_second_g", gate.level_probability(AtomLevel::G));
    table.meta("p_second_i", gate.level_probability(AtomLevel::I));
    if let Ok(fid) = flipped_branch_fidelity(cfg, &gate) {
        table.meta("flipped_field_vs_coherent_fidelity", fid);
    }
    let [pg, pi, n2g, n2i] = cols;
    table.push_column("theta", thetas)?;
    table.push_column("p_e_given_g", pg)?;
    table.push_column("p_e_given_i", pi)?;
    table.push_column("p_n2_given_g", n2g)?;
    table.push_column("p_n2_given_i", n2i)?;
    if !cfg.ideal {
        let names = [
            "p_e_given_g_est",
            "p_e_given_g_err",
            "count_g",
            "p_e_given_i_est",
            "p_e_given_i_err",
            "count_i",
        ];
        for (name, col) in names.into_iter().zip(shots_cols) {
            table.push_column(name, col)?;
        }
        table.meta("shots_per_point", cfg.trajectories);
        table.meta("rng_algorithm", RNG_ALGORITHM);
        table.meta("rng_streams", "substream(seed, scan index)");
    }
    Ok(table)
}

fn flipped_branch_fidelity(cfg: &ExperimentConfig, gate: &JointState) -> Result<f64> {
    let field = gate
        .conditional_field(AtomLevel::G)
        .ok_or_else(|| CqedError::Calibration("second atom never found in g".into()))?;
    flipped_field_fidelity(&field, cfg.field_alpha)
}

/// `|<-α|ψ>|²` for the conditional field `ψ`: how well the two-level
/// superposition with a flipped one-photon sign stands in for a
/// phase-flipped coherent field.
pub fn flipped_field_fidelity(field: &FieldState, alpha: f64) -> Result<f64> {
    let coherent = crate::hilbert::coherent_field(Complex64::new(-alpha, 0.0), field.n_max())?;
    let overlap: Complex64 = (0..=field.n_max())
        .map(|n| coherent.field().amplitude(n).conj() * field.amplitude(n))
        .sum();
    Ok(overlap.norm_sqr().min(1.0))
}

/// Ramsey phases of the CNOT sandwich `R_gi(φ_a)`, 2π pulse, `R_gi(φ_b)`.
///
/// With an empty cavity the 2π pulse does nothing, so the sandwich is
/// `R(φ_b) R(φ_a)`, the identity exactly when `φ_b = φ_a + π`. With one photon
/// the pulse is `diag(-1, 1)` on `(g, i)` and the sandwich becomes
/// `R(φ_a + π) diag(-1, 1) R(φ_a)`; at `φ_a = 0` this is the bit flip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnotCalibration {
    pub phi_a: f64,
    pub phi_b: f64,
    /// Largest deviation of the empty-cavity branch from the identity.
    pub identity_error: f64,
}

/// Derives `(φ_a, φ_b)` and checks the empty-cavity branch numerically.
pub fn calibrate_cnot(cfg: &ExperimentConfig) -> Result<CnotCalibration> {
    let omega = rabi_frequency(cfg)?;
    let phi_a = 0.0;
    let phi_b = phi_a + PI;
    let mut cal = CnotCalibration { phi_a, phi_b, identity_error: 0.0 };
    for level in [AtomLevel::G, AtomLevel::I] {
        let input = JointState::basis(level, 0, cfg.n_max)?;
        let out = cnot_sequence(&input, &cal, omega)?;
        for (a, b) in out.amplitudes().iter().zip(input.amplitudes()) {
            cal.identity_error = cal.identity_error.max((a - b).norm());
        }
    }
    if cal.identity_error > CNOT_CALIBRATION_TOLERANCE {
        return Err(CqedError::Calibration(format!(
            "empty-cavity CNOT branch deviates from identity by {:e}",
            cal.identity_error
        )));
    }
    Ok(cal)
}

/// The unitary part of the CNOT: target atom on `{g, i}`, control photon in
/// the cavity.
pub fn cnot_sequence(state: &JointState, cal: &CnotCalibration, omega: f64) -> Result<JointState> {
    let s = ramsey_pulse(state, RamseyTransition::Gi, cal.phi_a);
    let s = cavity_pulse(&s, 2.0 * PI, omega)?;
    Ok(ramsey_pulse(&s, RamseyTransition::Gi, cal.phi_b))
}

/// One row of the truth table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnotResult {
    pub control_in: u8,
    pub target_in: AtomLevel,
    pub control_out: u8,
    pub target_out: AtomLevel,
    /// Probability of the measured target outcome.
    pub target_probability: f64,
    pub photon_before: Vec<f64>,
    pub photon_after: Vec<f64>,
}

/// Runs the CNOT on a basis input and measures the target projectively.
/// The measurement uses `substream(cfg.seed, 2 control + target index)`.
pub fn run_cnot(control: u8, target: AtomLevel, cfg: &ExperimentConfig) -> Result<CnotResult> {
    if control > 1 {
        return Err(CqedError::param("control", "photon number must be 0 or 1"));
    }
    if target == AtomLevel::E {
        return Err(CqedError::param("target", "the target qubit is g or i"));
    }
    let omega = rabi_frequency(cfg)?;
    let cal = calibrate_cnot(cfg)?;
    let input = JointState::basis(target, usize::from(control), cfg.n_max)?;
    let out = cnot_sequence(&input, &cal, omega)?;
    let photon_before = input.photon_distribution();
    let photon_after = out.photon_distribution();
    let t_index = u64::from(target == AtomLevel::I);
    let mut rng = RngStream::substream(cfg.seed, 2 * u64::from(control) + t_index);
    let m = measure_atom(&out, &mut rng)?;
    let control_out = photon_after
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (n, &p)| if p > best.1 { (n, p) } else { best })
        .0 as u8;
    Ok(CnotResult {
        control_in: control,
        target_in: target,
        control_out,
        target_out: m.level,
        target_probability: m.probability,
        photon_before,
        photon_after,
    })
}

/// All four rows in the order `(0,g), (0,i), (1,g), (1,i)`.
pub fn cnot_truth_table(cfg: &ExperimentConfig) -> Result<Vec<CnotResult>> {
    let mut rows = Vec::with_capacity(4);
    for control in 0..2u8 {
        for target in [AtomLevel::G, AtomLevel::I] {
            rows.push(run_cnot(control, target, cfg)?);
        }
    }
    Ok(rows)
}

/// Truth table as a table. Levels are encoded `g = 0`, `i = 1`.
pub fn run_cnot_table(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let rows = cnot_truth_table(cfg)?;
    let code = |l: AtomLevel| if l == AtomLevel::I { 1.0 } else { 0.0 };
    let cal = calibrate_cnot(cfg)?;
    let mut table = base_table(cfg, Experiment::Cnot);
    table.meta("phi_a", cal.phi_a);
    table.meta("phi_b", cal.phi_b);
    table.meta("calibration_identity_error", cal.identity_error);
    table.meta("level_encoding", "g=0,i=1");
    let control_change = rows
        .iter()
        .map(|r| {
            r.photon_before
                .iter()
                .zip(&r.photon_after)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    table.push_column("control_in", rows.iter().map(|r| f64::from(r.control_in)).collect())?;
    table.push_column("target_in", rows.iter().map(|r| code(r.target_in)).collect())?;
    table.push_column("control_out", rows.iter().map(|r| f64::from(r.control_out)).collect())?;
    table.push_column("target_out", rows.iter().map(|r| code(r.target_out)).collect())?;
    table.push_column("target_probability", rows.iter().map(|r| r.target_probability).collect())?;
    table.push_column("photon_distribution_change", control_change)?;
    Ok(table)
}

/// QND photon tracking.
///
/// Columns: `time`, `outcome` (1 = e, 0 = g) and `photon_number` for the
/// probes of trajectory 0 (stream `substream(seed, 0)`). The metadata carries
/// a `cfg.trajectories` ensemble summary over streams `0..trajectories`:
/// occupancy with its standard error, the censoring-aware dwell time and the
/// readout mismatch rates. Ideal mode removes dark counts and detection
/// losses.
pub fn run_qnd(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let probe = if cfg.ideal { cfg.probe.without_imperfections() } else { cfg.probe };
    let mut rng = RngStream::substream(cfg.seed, 0);
    let n0 = match cfg.qnd_initial {
        InitialPhoton::Fixed(n) => n,
        InitialPhoton::Stationary => u8::from(rng.bernoulli(cfg.bath.p1)),
    };
    let rec = qnd_trajectory(&cfg.bath, &probe, cfg.qnd_duration, n0, &mut rng)?;
    let summary = qnd_ensemble(
        &cfg.bath,
        &probe,
        cfg.qnd_duration,
        cfg.trajectories,
        cfg.seed,
        cfg.qnd_initial,
    )?;
    let mut table = base_table(cfg, Experiment::Qnd);
    table.meta("rng_algorithm", RNG_ALGORITHM);
    table.meta("rng_streams", "substream(seed, trajectory index)");
    table.meta("trajectory_0_initial_n", rec.initial_n);
    table.meta("trajectory_0_jumps", rec.jumps.len());
    table.meta("trajectory_0_occupancy", rec.occupancy());
    table.meta("ensemble_trajectories", summary.trajectories);
    table.meta("p1", cfg.bath.p1);
    table.meta("nbar", cfg.bath.nbar);
    table.meta("occupancy", summary.mean_occupancy);
    table.meta("occupancy_std_error", summary.occupancy_std_error);
    table.meta("dwell_time", summary.mean_dwell_time);
    table.meta("dwell_time_expected", cfg.bath.mean_dwell_time());
    table.meta("births", summary.births);
    table.meta("deaths", summary.deaths);
    let rate = |bad: u64, total: u64| if total > 0 { bad as f64 / total as f64 } else { f64::NAN };
    table.meta("mismatch_rate_n0", rate(summary.false_e_at_0, summary.probes_at_0));
    table.meta("mismatch_rate_n1", rate(summary.false_g_at_1, summary.probes_at_1));
    table.meta("probes_n0", summary.probes_at_0);
    table.meta("probes_n1", summary.probes_at_1);
    table.push_column("time", rec.probes.iter().map(|p| p.time).collect())?;
    table.push_column(
        "outcome",
        rec.probes
            .iter()
            .map(|p| if p.outcome == ProbeOutcome::E { 1.0 } else { 0.0 })
            .collect(),
    )?;
    table.push_column(
        "photon_number",
        rec.probes.iter().map(|p| f64::from(p.photon_number)).collect(),
    )?;
    Ok(table)
}

/// Dispatches by experiment.
pub fn run(experiment: Experiment, cfg: &ExperimentConfig) -> Result<ResultTable> {
    match experiment {
        Experiment::Rabi => run_rabi_scan(cfg),
        Experiment::Splitting => run_mode_splitting(cfg),
        Experiment::Ramsey => run_ramsey_fringes(cfg),
        Experiment::PhaseGate => run_phase_gate_fringes(cfg),
        Experiment::FieldPhase => run_field_phase_experiment(cfg),
        Experiment::Cnot => run_cnot_table(cfg),
        Experiment::Qnd => run_qnd(cfg),
    }
}
