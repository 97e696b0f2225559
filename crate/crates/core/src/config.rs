//! Flat `key = value unit` configuration files.
//!
//! One assignment per line; `#` starts a comment. Dimensional quantities must
//! carry their unit after the number (`g0 = 2.953e5 rad/s`), dimensionless ones
//! must not. Unknown keys are errors. An empty file yields
//! [`ExperimentConfig::default`].
//!
//! | key | unit | default |
//! |-----|------|---------|
//! | `omega` | rad/s | 2π · 51.1 GHz |
//! | `delta` | rad/s | 0 (resonant); `omega - omega_eg` |
//! | `omega_eg` | rad/s | alternative to `delta` |
//! | `g0` | rad/s | 2π · 47 kHz |
//! | `q_factor` | – | `omega · 0.13 s` (130 ms photon lifetime) |
//! | `kappa` | 1/s | `omega / q_factor`; give `kappa` or `q_factor`, not both |
//! | `gamma` | 1/s | 1 / 30 ms |
//! | `waist` | m | 6e-3 |
//! | `velocity` | m/s | 500 |
//! | `dipole` | C*m | 1.06e-26 |
//! | `mode_volume` | m^3 | 7.6e-7 |
//! | `cavity_length` | m | 2.7e-2 |
//! | `p1` | – | 0.05 |
//! | `epsilon_per_photon` | rad | π/2 |
//! | `probe_interval` | s | 1e-3 |
//! | `dark_count_prob` | – | 0.01 |
//! | `detection_efficiency` | – | 0.9 |
//! | `t2` | s | 3e-5 |
//! | `field_alpha` | – | 0.5 |
//! | `n_max` | – | 15 |
//! | `qnd_duration` | s | 2 |
//! | `qnd_initial` | – | `stationary`, `0` or `1` |
//! | `scan_start`, `scan_stop` | s, rad or rad/s (per experiment) | per experiment |
//! | `scan_points` | – | per experiment |
//! | `seed` | – | 1 |
//! | `trajectories` | – | 1000 |
//!
//! The defaults are configuration choices at the scale of microwave cavity
//! experiments, not measured values.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoherence::{BathParams, InitialPhoton, ProbeConfig};
use crate::dynamics::{kappa_from_q, CavityParams};
use crate::error::CqedError;
use crate::hilbert::DEFAULT_N_MAX;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl From<CqedError> for ConfigError {
    fn from(e: CqedError) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

/// Optional overrides of an experiment's scan grid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScanOverride {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    /// Unit the start/stop values were given in.
    pub unit: Option<ScanUnit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanUnit {
    Seconds,
    Radians,
    RadPerSecond,
}

impl ScanUnit {
    pub fn symbol(self) -> &'static str {
        match self {
            ScanUnit::Seconds => "s",
            ScanUnit::Radians => "rad",
            ScanUnit::RadPerSecond => "rad/s",
        }
    }
}

/// Everything an experiment needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub cavity: CavityParams,
    pub bath: BathParams,
    pub probe: ProbeConfig,
    pub scan: ScanOverride,
    pub seed: u64,
    pub trajectories: u64,
    /// Contrast decay time of the damped Rabi envelope (s).
    pub t2: f64,
    /// Injected coherent amplitude for the field-phase experiment.
    pub field_alpha: f64,
    pub n_max: usize,
    pub qnd_duration: f64,
    pub qnd_initial: InitialPhoton,
    /// Suppress every stochastic layer.
    pub ideal: bool,
}

const DEFAULT_LIFETIME: f64 = 0.13;

impl Default for ExperimentConfig {
    fn default() -> Self {
        let omega = 2.0 * PI * 51.1e9;
        let q_factor = omega * DEFAULT_LIFETIME;
        let kappa = omega / q_factor;
        Self {
            cavity: CavityParams {
                omega,
                g0: 2.0 * PI * 47e3,
                q_factor,
                kappa,
                gamma: 1.0 / 0.03,
                waist: 6e-3,
                velocity: 500.0,
                dipole: 1.06e-26,
                mode_volume: 7.6e-7,
                cavity_length: 2.7e-2,
                delta: 0.0,
            },
            bath: BathParams::new(kappa, 0.05).expect("default bath is valid"),
            probe: ProbeConfig::calibrated(FRAC_PI_2, 1e-3, 0.01, 0.9)
                .expect("default probe is valid"),
            scan: ScanOverride::default(),
            seed: 1,
            trajectories: 1000,
            t2: 3e-5,
            field_alpha: 0.5,
            n_max: DEFAULT_N_MAX,
            qnd_duration: 2.0,
            qnd_initial: InitialPhoton::Stationary,
            ideal: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.cavity.validate()?;
        self.bath.validate()?;
        self.probe.validate()?;
        if self.trajectories < 1 {
            return Err(ConfigError::Invalid("trajectories must be >= 1".into()));
        }
        if self.n_max < 1 {
            return Err(ConfigError::Invalid("n_max must be >= 1".into()));
        }
        if let Some(points) = self.scan.points {
            if points < 2 {
                return Err(ConfigError::Invalid("scan_points must be >= 2".into()));
            }
        }
        if !(self.t2 > 0.0) {
            return Err(ConfigError::Invalid("t2 must be > 0".into()));
        }
        if !(self.qnd_duration > 0.0) {
            return Err(ConfigError::Invalid("qnd_duration must be > 0".into()));
        }
        if !(self.field_alpha.is_finite() && self.field_alpha >= 0.0) {
            return Err(ConfigError::Invalid("field_alpha must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Unit {
    None,
    Fixed(&'static str),
    Scan,
}

const KEYS: &[(&str, Unit)] = &[
    ("omega", Unit::Fixed("rad/s")),
    ("omega_eg", Unit::Fixed("rad/s")),
    ("delta", Unit::Fixed("rad/s")),
    ("g0", Unit::Fixed("rad/s")),
    ("q_factor", Unit::None),
    ("kappa", Unit::Fixed("1/s")),
    ("gamma", Unit::Fixed("1/s")),
    ("waist", Unit::Fixed("m")),
    ("velocity", Unit::Fixed("m/s")),
    ("dipole", Unit::Fixed("C*m")),
    ("mode_volume", Unit::Fixed("m^3")),
    ("cavity_length", Unit::Fixed("m")),
    ("p1", Unit::None),
    ("epsilon_per_photon", Unit::Fixed("rad")),
    ("probe_interval", Unit::Fixed("s")),
    ("dark_count_prob", Unit::None),
    ("detection_efficiency", Unit::None),
    ("t2", Unit::Fixed("s")),
    ("field_alpha", Unit::None),
    ("n_max", Unit::None),
    ("qnd_duration", Unit::Fixed("s")),
    ("qnd_initial", Unit::None),
    ("scan_start", Unit::Scan),
    ("scan_stop", Unit::Scan),
    ("scan_points", Unit::None),
    ("seed", Unit::None),
    ("trajectories", Unit::None),
];

#[derive(Default)]
struct Raw {
    entries: Vec<(String, String, Option<String>, usize)>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<&(String, String, Option<String>, usize)> {
        self.entries.iter().find(|(k, ..)| k == key)
    }
}

fn parse_lines(text: &str) -> Result<Raw, ConfigError> {
    let mut raw = Raw::default();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| ConfigError::Parse { line: line_no, message };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        let Some(&(_, unit)) = KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(err(format!("unknown key `{key}`")));
        };
        if raw.get(key).is_some() {
            return Err(err(format!("duplicate key `{key}`")));
        }
        let mut tokens = value.split_whitespace();
        let number = tokens
            .next()
            .ok_or_else(|| err(format!("missing value for `{key}`")))?;
        let given_unit = tokens.next().map(str::to_owned);
        if let Some(extra) = tokens.next() {
            return Err(err(format!("unexpected trailing token `{extra}`")));
        }
        match (unit, &given_unit) {
            (Unit::None, Some(u)) => {
                return Err(err(format!("`{key}` is dimensionless, but unit `{u}` was given")))
            }
            (Unit::Fixed(expected), None) => {
                return Err(err(format!("`{key}` needs its unit: `{key} = {number} {expected}`")))
            }
            (Unit::Fixed(expected), Some(u)) if u != expected => {
                return Err(err(format!("`{key}` is in {expected}, not {u}")))
            }
            (Unit::Scan, None) => {
                return Err(err(format!("`{key}` needs a unit (s, rad or rad/s)")))
            }
            (Unit::Scan, Some(u)) if !["s", "rad", "rad/s"].contains(&u.as_str()) => {
                return Err(err(format!("`{key}` unit must be s, rad or rad/s, not {u}")))
            }
            _ => {}
        }
        raw.entries
            .push((key.to_owned(), number.to_owned(), given_unit, line_no));
    }
    Ok(raw)
}

fn number(raw: &Raw, key: &str) -> Result<Option<f64>, ConfigError> {
    let Some((_, value, _, line)) = raw.get(key) else {
        return Ok(None);
    };
    let v: f64 = value.parse().map_err(|_| ConfigError::Parse {
        line: *line,
        message: format!("`{key}`: `{value}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(ConfigError::Parse {
            line: *line,
            message: format!("`{key}` must be finite"),
        });
    }
    Ok(Some(v))
}

fn integer(raw: &Raw, key: &str) -> Result<Option<u64>, ConfigError> {
    let Some((_, value, _, line)) = raw.get(key) else {
        return Ok(None);
    };
    value.parse().map(Some).map_err(|_| ConfigError::Parse {
        line: *line,
        message: format!("`{key}`: `{value}` is not a non-negative integer"),
    })
}

fn range_error(raw: &Raw, key: &str, message: String) -> ConfigError {
    match raw.get(key) {
        Some((.., line)) => ConfigError::Parse {
            line: *line,
            message: format!("`{key}` out of range: {message}"),
        },
        None => ConfigError::Invalid(format!("`{key}` out of range: {message}")),
    }
}

fn positive(raw: &Raw, key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(range_error(raw, key, format!("must be > 0, got {v}")))
    }
}

fn probability(raw: &Raw, key: &str, v: f64) -> Result<f64, ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(range_error(raw, key, format!("must lie in [0, 1], got {v}")))
    }
}

/// Parses configuration text; see the module docs for keys and units.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw = parse_lines(text)?;
    let mut cfg = ExperimentConfig::default();
    let c = &mut cfg.cavity;

    if let Some(v) = number(&raw, "omega")? {
        c.omega = positive(&raw, "omega", v)?;
    }
    match (number(&raw, "delta")?, number(&raw, "omega_eg")?) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Invalid("give either `delta` or `omega_eg`, not both".into()))
        }
        (Some(d), None) => c.delta = d,
        (None, Some(w)) => c.delta = c.omega - positive(&raw, "omega_eg", w)?,
        (None, None) => {}
    }
    if let Some(v) = number(&raw, "g0")? {
        if v < 0.0 {
            return Err(range_error(&raw, "g0", format!("must be >= 0, got {v}")));
        }
        c.g0 = v;
    }
    match (number(&raw, "q_factor")?, number(&raw, "kappa")?) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Invalid(
                "give either `q_factor` or `kappa`, not both".into(),
            ))
        }
        (Some(q), None) => {
            c.q_factor = positive(&raw, "q_factor", q)?;
            c.kappa = kappa_from_q(c.omega, c.q_factor)?;
        }
        (None, Some(k)) => {
            c.kappa = positive(&raw, "kappa", k)?;
            c.q_factor = c.omega / c.kappa;
        }
        (None, None) => {
            c.q_factor = c.omega * DEFAULT_LIFETIME;
            c.kappa = kappa_from_q(c.omega, c.q_factor)?;
        }
    }
    if let Some(v) = number(&raw, "gamma")? {
        if v < 0.0 {
            return Err(range_error(&raw, "gamma", format!("must be >= 0, got {v}")));
        }
        c.gamma = v;
    }
    for (key, slot) in [
        ("waist", &mut c.waist),
        ("velocity", &mut c.velocity),
        ("dipole", &mut c.dipole),
        ("mode_volume", &mut c.mode_volume),
        ("cavity_length", &mut c.cavity_length),
    ] {
        if let Some(v) = number(&raw, key)? {
            *slot = positive(&raw, key, v)?;
        }
    }

    let p1 = match number(&raw, "p1")? {
        Some(v) if !(0.0..1.0 / 3.0).contains(&v) => {
            return Err(range_error(&raw, "p1", format!("must lie in [0, 1/3), got {v}")))
        }
        Some(v) => v,
        None => cfg.bath.p1,
    };
    cfg.bath = BathParams::new(cfg.cavity.kappa, p1)?;

    let eps = number(&raw, "epsilon_per_photon")?.unwrap_or(cfg.probe.epsilon_per_photon);
    let interval = match number(&raw, "probe_interval")? {
        Some(v) => positive(&raw, "probe_interval", v)?,
        None => cfg.probe.probe_interval,
    };
    let dark = match number(&raw, "dark_count_prob")? {
        Some(v) => probability(&raw, "dark_count_prob", v)?,
        None => cfg.probe.dark_count_prob,
    };
    let eff = match number(&raw, "detection_efficiency")? {
        Some(v) => probability(&raw, "detection_efficiency", v)?,
        None => cfg.probe.detection_efficiency,
    };
    cfg.probe = ProbeConfig::calibrated(eps, interval, dark, eff)?;

    if let Some(v) = number(&raw, "t2")? {
        cfg.t2 = positive(&raw, "t2", v)?;
    }
    if let Some(v) = number(&raw, "field_alpha")? {
        if v < 0.0 {
            return Err(range_error(&raw, "field_alpha", format!("must be >= 0, got {v}")));
        }
        cfg.field_alpha = v;
    }
    if let Some(v) = integer(&raw, "n_max")? {
        if v < 1 {
            return Err(range_error(&raw, "n_max", "must be >= 1".into()));
        }
        cfg.n_max = v as usize;
    }
    if let Some(v) = number(&raw, "qnd_duration")? {
        cfg.qnd_duration = positive(&raw, "qnd_duration", v)?;
    }
    if let Some((_, value, _, line)) = raw.get("qnd_initial") {
        cfg.qnd_initial = match value.as_str() {
            "stationary" => InitialPhoton::Stationary,
            "0" => InitialPhoton::Fixed(0),
            "1" => InitialPhoton::Fixed(1),
            other => {
                return Err(ConfigError::Parse {
                    line: *line,
                    message: format!("`qnd_initial` must be stationary, 0 or 1, not `{other}`"),
                })
            }
        };
    }

    let scan_unit = |key: &str| {
        raw.get(key).and_then(|(_, _, u, _)| u.as_deref()).map(|u| match u {
            "s" => ScanUnit::Seconds,
            "rad" => ScanUnit::Radians,
            _ => ScanUnit::RadPerSecond,
        })
    };
    let (u_start, u_stop) = (scan_unit("scan_start"), scan_unit("scan_stop"));
    if let (Some(a), Some(b)) = (u_start, u_stop) {
        if a != b {
            return Err(ConfigError::Invalid(
                "`scan_start` and `scan_stop` must use the same unit".into(),
            ));
        }
    }
    cfg.scan = ScanOverride {
        start: number(&raw, "scan_start")?,
        stop: number(&raw, "scan_stop")?,
        points: integer(&raw, "scan_points")?.map(|p| p as usize),
        unit: u_start.or(u_stop),
    };
    if let Some(v) = integer(&raw, "seed")? {
        cfg.seed = v;
    }
    if let Some(v) = integer(&raw, "trajectories")? {
        if v < 1 {
            return Err(range_error(&raw, "trajectories", "must be >= 1".into()));
        }
        cfg.trajectories = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.cavity.g0, 2.0 * PI * 47e3);
        assert!((cfg.cavity.kappa - 1.0 / 0.13).abs() < 1e-12);
        assert_eq!(parse_config("# only a comment\n\n").unwrap(), cfg);
    }

    #[test]
    fn negative_q_is_a_range_error() {
        let err = parse_config("q_factor = -1").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }), "{err}");
        assert!(err.to_string().contains("out of range"));
    }

    #[test]
    fn kappa_from_q_and_omega() {
        let cfg = parse_config("omega = 1e11 rad/s\nq_factor = 1e10\n").unwrap();
        assert!((cfg.cavity.kappa - 10.0).abs() < 1e-12);
        assert_eq!(cfg.bath.kappa, cfg.cavity.kappa);
        let cfg = parse_config("kappa = 4 1/s").unwrap();
        assert_eq!(cfg.cavity.kappa, 4.0);
        assert!(parse_config("kappa = 4 1/s\nq_factor = 1e9").is_err());
    }

    #[test]
    fn units_are_checked() {
        let err = parse_config("\ng0 = 3e5").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }), "{err}");
        assert!(parse_config("g0 = 3e5 Hz").is_err());
        assert!(parse_config("p1 = 0.1 s").is_err());
        let cfg = parse_config("g0 = 3e5 rad/s # comment").unwrap();
        assert_eq!(cfg.cavity.g0, 3e5);
        let cfg = parse_config("scan_start = 0 rad\nscan_stop = 6 rad\nscan_points = 11").unwrap();
        assert_eq!(cfg.scan.unit, Some(ScanUnit::Radians));
        assert!(parse_config("scan_start = 0 rad\nscan_stop = 1 s").is_err());
    }

    #[test]
    fn unknown_and_malformed_lines() {
        let err = parse_config("colour = blue").unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
        assert!(matches!(parse_config("g0 3e5 rad/s"), Err(ConfigError::Parse { line: 1, .. })));
        assert!(parse_config("seed = 1\nseed = 2").is_err());
        assert!(parse_config("p1 = 0.4").is_err());
        assert!(parse_config("n_max = 0").is_err());
        assert!(parse_config("trajectories = 0").is_err());
        assert!(parse_config("detection_efficiency = 1.2").is_err());
    }

    #[test]
    fn probe_is_recalibrated_for_epsilon() {
        let cfg = parse_config("epsilon_per_photon = 0.3 rad").unwrap();
        assert!((cfg.probe.r2_phase - (2.0 * PI - 0.3)).abs() < 1e-12);
    }

    #[test]
    fn detuning_alternatives() {
        let cfg = parse_config("omega = 100 rad/s\nomega_eg = 90 rad/s").unwrap();
        assert_eq!(cfg.cavity.delta, 10.0);
        assert!(parse_config("delta = 1 rad/s\nomega_eg = 90 rad/s").is_err());
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = load_config(Path::new("definitely/missing.cfg")).unwrap_err();
        assert!(err.to_string().contains("definitely/missing.cfg"));
    }
}
