//! Thermal photon jumps and QND photon counting.
//!
//! The cavity photon number lives in `{0, 1}`. Births happen at rate
//! `kappa * nbar` and deaths at `kappa * (1 + nbar)`; both are sampled with
//! exact exponential waiting times. Probe atoms read the photon number through
//! a Ramsey–dispersive–Ramsey sequence and never change it.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CqedError, Result};
use crate::hilbert::{AtomLevel, JointState};
use crate::pulses::{dispersive_interaction, ramsey_pulse, RamseyTransition};
use crate::rng::RngStream;

/// Largest tolerated `P(e | n = 0)` of a calibrated probe.
pub const CALIBRATION_TOLERANCE: f64 = 1e-9;

/// Thermal bath seen by the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    /// Photon decay rate (1/s).
    pub kappa: f64,
    /// Mean thermal photon number.
    pub nbar: f64,
    /// Steady-state probability of one photon.
    pub p1: f64,
}

impl BathParams {
    pub fn new(kappa: f64, p1: f64) -> Result<Self> {
        let bath = Self {
            kappa,
            nbar: nbar_from_p1(p1)?,
            p1,
        };
        bath.validate()?;
        Ok(bath)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(CqedError::param("kappa", format!("must be > 0, got {}", self.kappa)));
        }
        let nbar = nbar_from_p1(self.p1)?;
        if (nbar - self.nbar).abs() > 1e-12 * nbar.max(1.0) {
            return Err(CqedError::param(
                "nbar",
                format!("nbar = {} is inconsistent with p1 = {}", self.nbar, self.p1),
            ));
        }
        Ok(())
    }

    pub fn birth_rate(&self) -> f64 {
        self.kappa * self.nbar
    }

    pub fn death_rate(&self) -> f64 {
        self.kappa * (1.0 + self.nbar)
    }

    /// Relaxation rate of the two-state master equation, `kappa (1 + 2 nbar)`.
    pub fn relaxation_rate(&self) -> f64 {
        self.kappa * (1.0 + 2.0 * self.nbar)
    }

    /// `P(1)` at time `t` starting from `P(1) = p1_initial`.
    pub fn occupancy_at(&self, p1_initial: f64, t: f64) -> f64 {
        self.p1 + (p1_initial - self.p1) * (-self.relaxation_rate() * t).exp()
    }

    /// Mean lifetime of a photon, `1 / (kappa (1 + nbar))`.
    pub fn mean_dwell_time(&self) -> f64 {
        1.0 / self.death_rate()
    }
}

/// `nbar = p1 / (1 - 2 p1)`: the mean photon number whose birth-death steady
/// state in `{0, 1}` has `P(1) = p1`.
pub fn nbar_from_p1(p1: f64) -> Result<f64> {
    if !(0.0..1.0 / 3.0).contains(&p1) {
        return Err(CqedError::param("p1", format!("must lie in [0, 1/3), got {p1}")));
    }
    Ok(p1 / (1.0 - 2.0 * p1))
}

/// Probe-atom settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Dispersive phase per photon (rad).
    pub epsilon_per_photon: f64,
    /// Phase of the second Ramsey zone (rad); see [`calibrate_r2_phase`].
    pub r2_phase: f64,
    /// Time between probe atoms (s).
    pub probe_interval: f64,
    /// Probability that an ideal `g` reads as `e`.
    pub dark_count_prob: f64,
    /// Probability that an ideal `e` reads as `e`.
    pub detection_efficiency: f64,
}

impl ProbeConfig {
    /// Probe with `r2_phase` calibrated for `epsilon_per_photon`.
    pub fn calibrated(
        epsilon_per_photon: f64,
        probe_interval: f64,
        dark_count_prob: f64,
        detection_efficiency: f64,
    ) -> Result<Self> {
        let cfg = Self {
            epsilon_per_photon,
            r2_phase: calibrate_r2_phase(epsilon_per_photon),
            probe_interval,
            dark_count_prob,
            detection_efficiency,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Ideal probe at `ε = π/2`.
    pub fn ideal(probe_interval: f64) -> Result<Self> {
        Self::calibrated(FRAC_PI_2, probe_interval, 0.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.probe_interval > 0.0 && self.probe_interval.is_finite()) {
            return Err(CqedError::param("probe_interval", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.dark_count_prob) {
            return Err(CqedError::param("dark_count_prob", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.detection_efficiency) {
            return Err(CqedError::param("detection_efficiency", "must lie in [0, 1]"));
        }
        if !(self.epsilon_per_photon.is_finite() && self.r2_phase.is_finite()) {
            return Err(CqedError::param("epsilon_per_photon", "must be finite"));
        }
        Ok(())
    }

    /// Same probe without dark counts or detection losses.
    pub fn without_imperfections(&self) -> Self {
        Self {
            dark_count_prob: 0.0,
            detection_efficiency: 1.0,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProbeOutcome {
    E,
    G,
}

impl ProbeOutcome {
    pub fn symbol(self) -> &'static str {
        match self {
            ProbeOutcome::E => "e",
            ProbeOutcome::G => "g",
        }
    }
}

/// Probe atom state just before the second Ramsey zone, photon number `n`.
fn probe_state_before_r2(n: usize, epsilon: f64) -> JointState {
    let atom = JointState::basis(AtomLevel::E, n, 1).expect("n <= 1");
    let s = ramsey_pulse(&atom, RamseyTransition::Eg, 0.0);
    dispersive_interaction(&s, epsilon)
}

/// `P(e)` of the probe atom for photon number `n ∈ {0, 1}`.
fn probe_excited_probability(n: usize, probe: &ProbeConfig) -> f64 {
    let s = probe_state_before_r2(n, probe.epsilon_per_photon);
    ramsey_pulse(&s, RamseyTransition::Eg, probe.r2_phase).level_probability(AtomLevel::E)
}

/// Second-zone phase that sends the probe to `g` with certainty in an empty
/// cavity. The atom enters in `e`; after the first zone and the dispersive
/// shift it carries amplitudes `(c_e, c_g)`, and the second zone cancels the
/// `e` output when `e^{-iφ} = c_e / c_g`.
pub fn calibrate_r2_phase(epsilon: f64) -> f64 {
    let s = probe_state_before_r2(0, epsilon);
    let ratio = s.amplitude(AtomLevel::E, 0) / s.amplitude(AtomLevel::G, 0);
    (-ratio.arg()).rem_euclid(2.0 * PI)
}

/// A calibrated probe with its ideal response precomputed from the pulse
/// algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QndProbe {
    config: ProbeConfig,
    /// Ideal `P(e | n)` for `n = 0, 1`.
    p_excited: [f64; 2],
}

impl QndProbe {
    pub fn new(config: &ProbeConfig) -> Result<Self> {
        config.validate()?;
        let p_excited = [
            probe_excited_probability(0, config),
            probe_excited_probability(1, config),
        ];
        if p_excited[0] > CALIBRATION_TOLERANCE {
            return Err(CqedError::Calibration(format!(
                "P(g | n = 0) = {} < 1 - {CALIBRATION_TOLERANCE:e}; recalibrate r2_phase \
                 (expected {})",
                1.0 - p_excited[0],
                calibrate_r2_phase(config.epsilon_per_photon)
            )));
        }
        Ok(Self {
            config: *config,
            p_excited,
        })
    }

    pub fn config(&self) -> &ProbeConfig {
        &self.config
    }

    /// Ideal `P(e | n)`.
    pub fn excited_probability(&self, photon_n: u8) -> f64 {
        self.p_excited[usize::from(photon_n.min(1))]
    }

    /// Noise-free outcome, sampled with Born probabilities. One draw.
    pub fn ideal_outcome(&self, photon_n: u8, rng: &mut RngStream) -> ProbeOutcome {
        if rng.uniform() < self.excited_probability(photon_n) {
            ProbeOutcome::E
        } else {
            ProbeOutcome::G
        }
    }

    /// Detected outcome including dark counts and detection losses. Two draws.
    pub fn sample(&self, photon_n: u8, rng: &mut RngStream) -> ProbeOutcome {
        let ideal = self.ideal_outcome(photon_n, rng);
        let u = rng.uniform();
        match ideal {
            ProbeOutcome::G if u < self.config.dark_count_prob => ProbeOutcome::E,
            ProbeOutcome::E if u >= self.config.detection_efficiency => ProbeOutcome::G,
            other => other,
        }
    }
}

/// One probe readout for photon number `photon_n ∈ {0, 1}`.
pub fn probe_photon(photon_n: u8, probe: &ProbeConfig, rng: &mut RngStream) -> Result<ProbeOutcome> {
    if photon_n > 1 {
        return Err(CqedError::param("photon_n", "the probe model covers n ∈ {0, 1}"));
    }
    Ok(QndProbe::new(probe)?.sample(photon_n, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JumpKind {
    Birth,
    Death,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub kind: JumpKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub time: f64,
    pub outcome: ProbeOutcome,
    /// True photon number when the probe crossed the cavity.
    pub photon_number: u8,
}

/// One stochastic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub initial_n: u8,
    pub jumps: Vec<JumpEvent>,
    pub probes: Vec<ProbeRecord>,
    pub duration: f64,
    pub seed: u64,
    pub stream: u64,
}

impl TrajectoryRecord {
    pub fn photon_number_at(&self, t: f64) -> u8 {
        let flips = self.jumps.iter().take_while(|j| j.time <= t).count();
        self.initial_n ^ (flips % 2) as u8
    }

    /// Fraction of the run spent with one photon.
    pub fn occupancy(&self) -> f64 {
        let mut n = self.initial_n;
        let mut last = 0.0;
        let mut occupied = 0.0;
        for j in &self.jumps {
            if n == 1 {
                occupied += j.time - last;
            }
            last = j.time;
            n ^= 1;
        }
        if n == 1 {
            occupied += self.duration - last;
        }
        occupied / self.duration
    }

    /// Checks ordering, bounds and birth/death alternation.
    pub fn check_invariants(&self) -> Result<()> {
        let bad = |msg: String| Err(CqedError::param("trajectory", msg));
        let mut n = self.initial_n;
        let mut last = f64::NEG_INFINITY;
        for j in &self.jumps {
            if j.time <= last || j.time < 0.0 || j.time > self.duration {
                return bad(format!("jump time {} out of order", j.time));
            }
            let expected = if n == 0 { JumpKind::Birth } else { JumpKind::Death };
            if j.kind != expected {
                return bad(format!("jump at {} breaks birth/death alternation", j.time));
            }
            n ^= 1;
            last = j.time;
        }
        let mut last = f64::NEG_INFINITY;
        for p in &self.probes {
            if p.time <= last || p.time > self.duration {
                return bad(format!("probe time {} out of order", p.time));
            }
            last = p.time;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    Jump(JumpEvent),
    Probe(ProbeRecord),
}

/// Core event loop shared by single records and ensemble statistics.
fn run_jump_process(
    bath: &BathParams,
    probe: &QndProbe,
    duration: f64,
    initial_n: u8,
    rng: &mut RngStream,
    mut sink: impl FnMut(Event),
) {
    let rate = |n: u8| if n == 0 { bath.birth_rate() } else { bath.death_rate() };
    let interval = probe.config().probe_interval;
    let mut n = initial_n;
    let mut next_jump = rng.exponential(rate(n));
    let mut k: u64 = 1;
    loop {
        let next_probe = k as f64 * interval;
        if next_probe > duration && next_jump > duration {
            break;
        }
        if next_probe <= next_jump {
            let outcome = probe.sample(n, rng);
            sink(Event::Probe(ProbeRecord {
                time: next_probe,
                outcome,
                photon_number: n,
            }));
            k += 1;
        } else {
            let kind = if n == 0 { JumpKind::Birth } else { JumpKind::Death };
            sink(Event::Jump(JumpEvent { time: next_jump, kind }));
            n ^= 1;
            next_jump += rng.exponential(rate(n));
        }
    }
}

fn validate_run(bath: &BathParams, duration: f64, initial_n: u8) -> Result<()> {
    bath.validate()?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(CqedError::param("duration", format!("must be > 0, got {duration}")));
    }
    if initial_n > 1 {
        return Err(CqedError::param("initial_n", "must be 0 or 1"));
    }
    Ok(())
}

/// A single QND run over `[0, duration]`, probing at multiples of the probe
/// interval.
pub fn qnd_trajectory(
    bath: &BathParams,
    probe: &ProbeConfig,
    duration: f64,
    initial_n: u8,
    rng: &mut RngStream,
) -> Result<TrajectoryRecord> {
    validate_run(bath, duration, initial_n)?;
    let probe = QndProbe::new(probe)?;
    let mut jumps = Vec::new();
    let mut probes = Vec::new();
    run_jump_process(bath, &probe, duration, initial_n, rng, |e| match e {
        Event::Jump(j) => jumps.push(j),
        Event::Probe(p) => probes.push(p),
    });
    Ok(TrajectoryRecord {
        initial_n,
        jumps,
        probes,
        duration,
        seed: rng.seed(),
        stream: rng.stream(),
    })
}

/// How an ensemble picks the photon number at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialPhoton {
    Fixed(u8),
    /// Drawn from the steady state with one uniform from the trajectory stream.
    Stationary,
}

/// Per-trajectory tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrajectoryStats {
    pub occupancy: f64,
    pub time_with_photon: f64,
    pub births: u64,
    pub deaths: u64,
    pub probes_at_0: u64,
    pub false_e_at_0: u64,
    pub probes_at_1: u64,
    pub false_g_at_1: u64,
}

fn trajectory_stats(
    bath: &BathParams,
    probe: &QndProbe,
    duration: f64,
    initial_n: u8,
    rng: &mut RngStream,
) -> TrajectoryStats {
    let mut st = TrajectoryStats::default();
    let mut n = initial_n;
    let mut last = 0.0;
    run_jump_process(bath, probe, duration, initial_n, rng, |e| match e {
        Event::Jump(j) => {
            if n == 1 {
                st.time_with_photon += j.time - last;
                st.deaths += 1;
            } else {
                st.births += 1;
            }
            last = j.time;
            n ^= 1;
        }
        Event::Probe(p) => {
            if p.photon_number == 0 {
                st.probes_at_0 += 1;
                st.false_e_at_0 += u64::from(p.outcome == ProbeOutcome::E);
            } else {
                st.probes_at_1 += 1;
                st.false_g_at_1 += u64::from(p.outcome == ProbeOutcome::G);
            }
        }
    });
    if n == 1 {
        st.time_with_photon += duration - last;
    }
    st.occupancy = st.time_with_photon / duration;
    st
}

/// Aggregated ensemble statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub trajectories: u64,
    pub duration: f64,
    /// Mean over trajectories of the time-averaged photon occupancy.
    pub mean_occupancy: f64,
    /// Standard error of `mean_occupancy`.
    pub occupancy_std_error: f64,
    pub births: u64,
    pub deaths: u64,
    pub time_with_photon: f64,
    /// Censoring-aware estimate `time_with_photon / deaths` (NaN without deaths).
    pub mean_dwell_time: f64,
    pub probes_at_0: u64,
    pub false_e_at_0: u64,
    pub probes_at_1: u64,
    pub false_g_at_1: u64,
}

/// Runs `trajectories` independent trajectories in parallel. Trajectory `k`
/// uses [`RngStream::substream`]`(seed, k)`; the reduction is sequential in
/// `k`, so results are bit-identical for a given seed regardless of thread
/// count.
pub fn qnd_ensemble(
    bath: &BathParams,
    probe: &ProbeConfig,
    duration: f64,
    trajectories: u64,
    seed: u64,
    initial: InitialPhoton,
) -> Result<EnsembleSummary> {
    if trajectories == 0 {
        return Err(CqedError::param("trajectories", "must be >= 1"));
    }
    if let InitialPhoton::Fixed(n) = initial {
        validate_run(bath, duration, n)?;
    } else {
        validate_run(bath, duration, 0)?;
    }
    let probe = QndProbe::new(probe)?;
    let stats: Vec<TrajectoryStats> = (0..trajectories)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::substream(seed, k);
            let n0 = match initial {
                InitialPhoton::Fixed(n) => n,
                InitialPhoton::Stationary => u8::from(rng.bernoulli(bath.p1)),
            };
            trajectory_stats(bath, &probe, duration, n0, &mut rng)
        })
        .collect();

    let count = stats.len() as f64;
    let mean = stats.iter().map(|s| s.occupancy).sum::<f64>() / count;
    let var = if stats.len() > 1 {
        stats.iter().map(|s| (s.occupancy - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let mut summary = EnsembleSummary {
        trajectories,
        duration,
        mean_occupancy: mean,
        occupancy_std_error: (var / count).sqrt(),
        births: 0,
        deaths: 0,
        time_with_photon: 0.0,
        mean_dwell_time: f64::NAN,
        probes_at_0: 0,
        false_e_at_0: 0,
        probes_at_1: 0,
        false_g_at_1: 0,
    };
    for s in &stats {
        summary.births += s.births;
        summary.deaths += s.deaths;
        summary.time_with_photon += s.time_with_photon;
        summary.probes_at_0 += s.probes_at_0;
        summary.false_e_at_0 += s.false_e_at_0;
        summary.probes_at_1 += s.probes_at_1;
        summary.false_g_at_1 += s.false_g_at_1;
    }
    if summary.deaths > 0 {
        summary.mean_dwell_time = summary.time_with_photon / summary.deaths as f64;
    }
    Ok(summary)
}

/// Rabi oscillation with an exponentially shrinking contrast around 1/2:
/// `P_e(t) = 1/2 + e^{-t/T2} cos(Omega t) / 2`.
pub fn damped_rabi_probability(t: f64, omega_rabi: f64, t2: f64) -> Result<f64> {
    if !(t2 > 0.0) {
        return Err(CqedError::param("t2", format!("must be > 0, got {t2}")));
    }
    Ok(0.5 + 0.5 * (-t / t2).exp() * (omega_rabi * t).cos())
}

/// Complex amplitude helper for callers that inspect the probe circuit.
pub fn probe_amplitudes_before_r2(photon_n: u8, epsilon: f64) -> [Complex64; 2] {
    let n = usize::from(photon_n.min(1));
    let s = probe_state_before_r2(n, epsilon);
    [s.amplitude(AtomLevel::E, n), s.amplitude(AtomLevel::G, n)]
}
