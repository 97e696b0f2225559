//! Joint atom ⊗ cavity state vectors.
//!
//! The atom has three levels ordered (e, g, i); the cavity is a single mode
//! truncated at `n_max` photons. Amplitudes are stored densely with index
//! `level * (n_max + 1) + n`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CqedError, Result};
use crate::rng::RngStream;

/// Default Fock truncation.
pub const DEFAULT_N_MAX: usize = 15;

/// Norm tolerance for constructed and evolved states.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Largest allowed `1 - sum |C_n|^2` for a truncated coherent state.
pub const COHERENT_LEAK_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomLevel {
    /// Upper level of the cavity transition.
    E,
    /// Lower level of the cavity transition.
    G,
    /// Auxiliary level, far off resonance with the mode.
    I,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 3] = [AtomLevel::E, AtomLevel::G, AtomLevel::I];

    pub fn index(self) -> usize {
        match self {
            AtomLevel::E => 0,
            AtomLevel::G => 1,
            AtomLevel::I => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn symbol(self) -> &'static str {
        match self {
            AtomLevel::E => "e",
            AtomLevel::G => "g",
            AtomLevel::I => "i",
        }
    }
}

impl fmt::Display for AtomLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl std::str::FromStr for AtomLevel {
    type Err = CqedError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" => Ok(AtomLevel::E),
            "g" => Ok(AtomLevel::G),
            "i" => Ok(AtomLevel::I),
            other => Err(CqedError::param("level", format!("unknown atom level `{other}`"))),
        }
    }
}

/// Anything that is a plain amplitude vector.
pub trait Ket {
    fn amplitudes(&self) -> &[Complex64];

    fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    fn inner(&self, other: &Self) -> Result<Complex64>
    where
        Self: Sized,
    {
        let (a, b) = (self.amplitudes(), other.amplitudes());
        if a.len() != b.len() {
            return Err(CqedError::DimensionMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        Ok(a.iter().zip(b).map(|(x, y)| x.conj() * y).sum())
    }
}

/// `|<a|b>|^2`, clamped to `[0, 1]` against rounding.
pub fn fidelity<K: Ket>(a: &K, b: &K) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

fn check_n_max(n_max: usize) -> Result<()> {
    if n_max < 1 {
        return Err(CqedError::param("n_max", "must be at least 1"));
    }
    Ok(())
}

fn check_norm(amplitudes: &[Complex64]) -> Result<()> {
    let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(CqedError::param(
            "amplitudes",
            format!("state is not normalized (norm^2 = {norm})"),
        ));
    }
    Ok(())
}

/// State of the atom and the cavity mode together.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    n_max: usize,
    amplitudes: Vec<Complex64>,
}

impl Ket for JointState {
    fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

impl JointState {
    pub fn dim_for(n_max: usize) -> usize {
        3 * (n_max + 1)
    }

    /// `|level, n>`.
    pub fn basis(level: AtomLevel, n: usize, n_max: usize) -> Result<Self> {
        check_n_max(n_max)?;
        if n > n_max {
            return Err(CqedError::Truncation(format!(
                "photon number {n} exceeds truncation n_max = {n_max}"
            )));
        }
        let mut amplitudes = vec![ZERO; Self::dim_for(n_max)];
        amplitudes[level.index() * (n_max + 1) + n] = ONE;
        Ok(Self { n_max, amplitudes })
    }

    /// Takes ownership of a normalized amplitude vector of length `3 (n_max + 1)`.
    pub fn from_amplitudes(n_max: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_n_max(n_max)?;
        if amplitudes.len() != Self::dim_for(n_max) {
            return Err(CqedError::DimensionMismatch {
                left: amplitudes.len(),
                right: Self::dim_for(n_max),
            });
        }
        check_norm(&amplitudes)?;
        Ok(Self { n_max, amplitudes })
    }

    /// Product state `(c_e|e> + c_g|g> + c_i|i>) ⊗ |field>`, normalized.
    pub fn product(atom: [Complex64; 3], field: &FieldState) -> Result<Self> {
        let n_max = field.n_max();
        let mut amplitudes = Vec::with_capacity(Self::dim_for(n_max));
        for c in atom {
            amplitudes.extend(field.amplitudes().iter().map(|f| c * f));
        }
        normalized(n_max, amplitudes)
    }

    /// Unchecked construction for operations that are unitary by construction.
    pub(crate) fn from_raw(n_max: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), Self::dim_for(n_max));
        Self { n_max, amplitudes }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn index(&self, level: AtomLevel, n: usize) -> usize {
        level.index() * (self.n_max + 1) + n
    }

    /// Amplitude of `|level, n>`; zero beyond the truncation.
    pub fn amplitude(&self, level: AtomLevel, n: usize) -> Complex64 {
        if n > self.n_max {
            return ZERO;
        }
        self.amplitudes[self.index(level, n)]
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// Probability of finding the atom in `level`.
    pub fn level_probability(&self, level: AtomLevel) -> f64 {
        let start = level.index() * (self.n_max + 1);
        self.amplitudes[start..start + self.n_max + 1]
            .iter()
            .map(|a| a.norm_sqr())
            .sum()
    }

    /// Photon-number distribution with the atom traced out.
    pub fn photon_distribution(&self) -> Vec<f64> {
        (0..=self.n_max)
            .map(|n| {
                AtomLevel::ALL
                    .iter()
                    .map(|&l| self.amplitude(l, n).norm_sqr())
                    .sum()
            })
            .collect()
    }

    /// Field state conditioned on the atom being found in `level`, or `None`
    /// when that outcome has zero probability.
    pub fn conditional_field(&self, level: AtomLevel) -> Option<FieldState> {
        let start = level.index() * (self.n_max + 1);
        let slice = &self.amplitudes[start..start + self.n_max + 1];
        let p: f64 = slice.iter().map(|a| a.norm_sqr()).sum();
        if p <= 0.0 {
            return None;
        }
        let scale = 1.0 / p.sqrt();
        Some(FieldState {
            amplitudes: slice.iter().map(|a| a * scale).collect(),
        })
    }

    /// Multiplies every amplitude by a unit-modulus phase.
    pub fn with_global_phase(&self, phase: f64) -> Self {
        let f = Complex64::from_polar(1.0, phase);
        Self::from_raw(self.n_max, self.amplitudes.iter().map(|a| a * f).collect())
    }
}

fn normalized(n_max: usize, mut amplitudes: Vec<Complex64>) -> Result<JointState> {
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm <= 1e-12 {
        return Err(CqedError::DegenerateSuperposition { norm });
    }
    let scale = 1.0 / norm;
    amplitudes.iter_mut().for_each(|a| *a *= scale);
    Ok(JointState::from_raw(n_max, amplitudes))
}

/// Normalized linear combination of joint states.
pub fn superpose(terms: &[(&JointState, Complex64)]) -> Result<JointState> {
    let Some((first, _)) = terms.first() else {
        return Err(CqedError::DegenerateSuperposition { norm: 0.0 });
    };
    let n_max = first.n_max;
    let mut acc = vec![ZERO; first.dim()];
    for (state, c) in terms {
        if state.n_max != n_max {
            return Err(CqedError::DimensionMismatch {
                left: JointState::dim_for(n_max),
                right: state.dim(),
            });
        }
        for (a, s) in acc.iter_mut().zip(&state.amplitudes) {
            *a += c * s;
        }
    }
    normalized(n_max, acc)
}

/// Cavity-only state over `|0> .. |n_max>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    amplitudes: Vec<Complex64>,
}

impl Ket for FieldState {
    fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

impl FieldState {
    pub fn fock(n: usize, n_max: usize) -> Result<Self> {
        check_n_max(n_max)?;
        if n > n_max {
            return Err(CqedError::Truncation(format!(
                "photon number {n} exceeds truncation n_max = {n_max}"
            )));
        }
        let mut amplitudes = vec![ZERO; n_max + 1];
        amplitudes[n] = ONE;
        Ok(Self { amplitudes })
    }

    pub fn vacuum(n_max: usize) -> Result<Self> {
        Self::fock(0, n_max)
    }

    /// Normalized field from raw amplitudes (length `n_max + 1`).
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_n_max(amplitudes.len().saturating_sub(1))?;
        check_norm(&amplitudes)?;
        Ok(Self { amplitudes })
    }

    /// Normalizes an arbitrary non-zero vector.
    pub fn normalize(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_n_max(amplitudes.len().saturating_sub(1))?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-12 {
            return Err(CqedError::DegenerateSuperposition { norm });
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { amplitudes })
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitude(&self, n: usize) -> Complex64 {
        self.amplitudes.get(n).copied().unwrap_or(ZERO)
    }

    pub fn photon_distribution(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multiplies `|n>` by `e^{i phi n}`, taking `|alpha>` to `|alpha e^{i phi}>`.
    pub fn phase_rotated(&self, phi: f64) -> Self {
        Self {
            amplitudes: self
                .amplitudes
                .iter()
                .enumerate()
                .map(|(n, a)| a * Complex64::from_polar(1.0, phi * n as f64))
                .collect(),
        }
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }
}

/// Truncated coherent state `|alpha>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentField {
    alpha: Complex64,
    field: FieldState,
}

impl Ket for CoherentField {
    fn amplitudes(&self) -> &[Complex64] {
        self.field.amplitudes()
    }
}

impl CoherentField {
    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn field(&self) -> &FieldState {
        &self.field
    }

    pub fn into_field(self) -> FieldState {
        self.field
    }

    pub fn n_max(&self) -> usize {
        self.field.n_max()
    }
}

/// Population of `|alpha>` above `n_max`, summed from the Poisson tail.
pub fn coherent_leak(alpha: Complex64, n_max: usize) -> f64 {
    let mean = alpha.norm_sqr();
    // |C_n|^2 recurrence: p_{n+1} = p_n * mean / (n + 1)
    let mut p = (-mean).exp();
    for n in 0..=n_max {
        p *= mean / (n + 1) as f64;
    }
    let mut tail = 0.0;
    let mut n = n_max + 1;
    while p > 0.0 {
        tail += p;
        n += 1;
        p *= mean / n as f64;
        if n > n_max + 1 + 10_000 || (p < tail * 1e-17 && (n as f64) > mean) {
            break;
        }
    }
    tail
}

/// Smallest truncation at which `|alpha>` leaks at most [`COHERENT_LEAK_TOLERANCE`].
pub fn required_n_max(alpha: Complex64) -> usize {
    let mut n_max = 1;
    while coherent_leak(alpha, n_max) > COHERENT_LEAK_TOLERANCE {
        n_max += 1;
    }
    n_max
}

/// `C_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!)` for `n <= n_max`.
pub fn coherent_field(alpha: Complex64, n_max: usize) -> Result<CoherentField> {
    check_n_max(n_max)?;
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(CqedError::param("alpha", "must be finite"));
    }
    let leak = coherent_leak(alpha, n_max);
    if leak > COHERENT_LEAK_TOLERANCE {
        return Err(CqedError::Truncation(format!(
            "coherent state alpha = {alpha} leaks {leak:e} above n_max = {n_max}; \
             requires n_max >= {}",
            required_n_max(alpha)
        )));
    }
    let mut amplitudes = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..=n_max {
        amplitudes.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    Ok(CoherentField {
        alpha,
        field: FieldState { amplitudes },
    })
}

/// Outcome of a projective measurement of the atom.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomMeasurement {
    pub level: AtomLevel,
    /// Post-measurement state with the atom in `level`.
    pub state: JointState,
    /// Probability of the realized outcome.
    pub probability: f64,
}

/// Born-rule measurement of the atomic level. Consumes one uniform draw.
pub fn measure_atom(state: &JointState, rng: &mut RngStream) -> Result<AtomMeasurement> {
    check_norm(state.amplitudes())?;
    let probs = AtomLevel::ALL.map(|l| state.level_probability(l));
    let u = rng.uniform() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut chosen = None;
    for (level, &p) in AtomLevel::ALL.iter().zip(&probs) {
        acc += p;
        if p > 0.0 && u < acc {
            chosen = Some(*level);
            break;
        }
    }
    // Rounding can leave u == acc at the very top; fall back to the last
    // outcome with non-zero weight.
    let level = chosen.unwrap_or_else(|| {
        *AtomLevel::ALL
            .iter()
            .zip(&probs)
            .rev()
            .find(|(_, &p)| p > 0.0)
            .map(|(l, _)| l)
            .expect("normalized state has a non-zero level")
    });
    let probability = probs[level.index()];
    let n_max = state.n_max();
    let mut amplitudes = vec![ZERO; state.dim()];
    let scale = 1.0 / probability.sqrt();
    for n in 0..=n_max {
        let k = state.index(level, n);
        amplitudes[k] = state.amplitudes()[k] * scale;
    }
    Ok(AtomMeasurement {
        level,
        state: JointState::from_raw(n_max, amplitudes),
        probability,
    })
}
