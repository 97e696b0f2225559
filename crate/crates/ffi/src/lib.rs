//! C interface to the `cavity-qed` simulator.
//!
//! Objects cross the boundary as opaque handles (`CqedState`, `CqedRng`,
//! `CqedTrajectory`) created by `cqed_*_new`-style constructors and released
//! with the matching `*_free`. Every fallible call returns a [`CqedStatus`];
//! on failure `cqed_last_error()` describes what went wrong on the calling
//! thread. Results come back through out-pointers, which are only written on
//! success.
//!
//! Atomic levels are passed as `CQED_LEVEL_E`, `CQED_LEVEL_G`,
//! `CQED_LEVEL_I`; Ramsey transitions as `CQED_RAMSEY_EG`, `CQED_RAMSEY_GI`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cavity_qed::decoherence::{qnd_trajectory, BathParams, JumpKind, ProbeConfig, ProbeOutcome, TrajectoryRecord};
use cavity_qed::dynamics::evolve_resonant;
use cavity_qed::experiments::{run_cnot, ExperimentConfig};
use cavity_qed::hilbert::{coherent_field, fidelity, measure_atom};
use cavity_qed::pulses::{cavity_pulse, conditional_phase_gate, dispersive_interaction, ramsey_pulse, RamseyTransition};
use cavity_qed::{AtomLevel, CqedError, JointState, RngStream};
use num_complex::Complex64;

pub const CQED_LEVEL_E: u32 = 0;
pub const CQED_LEVEL_G: u32 = 1;
pub const CQED_LEVEL_I: u32 = 2;

pub const CQED_RAMSEY_EG: u32 = 0;
pub const CQED_RAMSEY_GI: u32 = 1;

pub const CQED_JUMP_BIRTH: u32 = 0;
pub const CQED_JUMP_DEATH: u32 = 1;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CqedStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Truncation = 3,
    DimensionMismatch = 4,
    Subspace = 5,
    Calibration = 6,
    Numerical = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// Joint atom-cavity state vector.
pub struct CqedState(JointState);

/// Seeded random stream.
pub struct CqedRng(RngStream);

/// Recorded QND trajectory.
pub struct CqedTrajectory(TrajectoryRecord);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CqedStatus, String);

impl From<CqedError> for Failure {
    fn from(e: CqedError) -> Self {
        let status = match &e {
            CqedError::Truncation(_) => CqedStatus::Truncation,
            CqedError::DimensionMismatch { .. } => CqedStatus::DimensionMismatch,
            CqedError::Subspace { .. } => CqedStatus::Subspace,
            CqedError::Calibration(_) => CqedStatus::Calibration,
            CqedError::DegenerateSuperposition { .. } => CqedStatus::Numerical,
            CqedError::InvalidParameter { .. } | CqedError::Unsupported(_) | CqedError::Grid(_) => {
                CqedStatus::InvalidArgument
            }
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: CqedStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CqedStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CqedStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CqedStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().map_or_else(|| fail(CqedStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn get_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().map_or_else(|| fail(CqedStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return fail(CqedStatus::NullPointer, "output pointer is null");
    }
    out.write(value);
    Ok(())
}

/// Boxes `value` into a handle, checking `out` first so nothing leaks.
unsafe fn put_handle<T>(out: *mut *mut T, value: impl FnOnce() -> Result<T, Failure>) -> Result<(), Failure> {
    if out.is_null() {
        return fail(CqedStatus::NullPointer, "output pointer is null");
    }
    out.write(Box::into_raw(Box::new(value()?)));
    Ok(())
}

fn level(code: u32) -> Result<AtomLevel, Failure> {
    usize::try_from(code)
        .ok()
        .and_then(AtomLevel::from_index)
        .map_or_else(|| fail(CqedStatus::InvalidArgument, format!("unknown level code {code}")), Ok)
}

fn level_code(l: AtomLevel) -> u32 {
    l.index() as u32
}

fn transition(code: u32) -> Result<RamseyTransition, Failure> {
    match code {
        CQED_RAMSEY_EG => Ok(RamseyTransition::Eg),
        CQED_RAMSEY_GI => Ok(RamseyTransition::Gi),
        _ => fail(CqedStatus::InvalidArgument, format!("unknown transition code {code}")),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cqed_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Message of the last failed call on this thread, or NULL after a success.
/// Valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn cqed_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// `|level, n>` with the field truncated at `n_max`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cqed_state_basis(level_code: u32, n: usize, n_max: usize, out: *mut *mut CqedState) -> CqedStatus {
    guard(|| {
        put_handle(out, || Ok(CqedState(JointState::basis(level(level_code)?, n, n_max)?)))
    })
}

/// Atom in `level` times the coherent field `|alpha>`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cqed_state_coherent(
    level_code: u32,
    alpha_re: f64,
    alpha_im: f64,
    n_max: usize,
    out: *mut *mut CqedState,
) -> CqedStatus {
    guard(|| {
        put_handle(out, || {
            let field = coherent_field(Complex64::new(alpha_re, alpha_im), n_max)?;
            let mut atom = [Complex64::new(0.0, 0.0); 3];
            atom[level(level_code)?.index()] = Complex64::new(1.0, 0.0);
            Ok(CqedState(JointState::product(atom, field.field())?))
        })
    })
}

/// # Safety
/// `state` must be NULL or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn cqed_state_free(state: *mut CqedState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cqed_state_clone(state: *const CqedState, out: *mut *mut CqedState) -> CqedStatus {
    guard(|| {
        put_handle(out, || Ok(CqedState(get(state, "state")?.0.clone())))
    })
}

/// Hilbert-space dimension, 0 for a null handle.
///
/// # Safety
/// `state` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cqed_state_dim(state: *const CqedState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// # Safety
/// `state` must be a live handle; `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cqed_state_amplitude(
    state: *const CqedState,
    level_code: u32,
    n: usize,
    re: *mut f64,
    im: *mut f64,
) -> CqedStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return fail(CqedStatus::NullPointer, "output pointer is null");
        }
        let s = &get(state, "state")?.0;
        if n > s.n_max() {
            return fail(CqedStatus::OutOfRange, format!("n = {n} exceeds n_max = {}", s.n_max()));
        }
        let a = s.amplitude(level(level_code)?, n);
        put(re, a.re)?;
        put(im, a.im)
    })
}

/// # Safety
/// `state` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cqed_state_level_probability(state: *const CqedState, level_code: u32, out: *mut f64) -> CqedStatus {
    guard(|| put(out, get(state, "state")?.0.level_probability(level(level_code)?)))
}

/// `|<a|b>|²`.
///
/// # Safety
/// `a`, `b` must be live handles; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cqed_fidelity(a: *const CqedState, b: *const CqedState, out: *mut f64) -> CqedStatus {
    guard(|| put(out, fidelity(&get(a, "a")?.0, &get(b, "b")?.0)?))
}

unsafe fn update(state: *mut CqedState, f: impl FnOnce(&JointState) -> Result<JointState, Failure>) -> CqedStatus {
    guard(|| {
        let s = get_mut(state, "state")?;
        s.0 = f(&s.0)?;
        Ok(())
    })
}

/// Resonant evolution for time `t` at vacuum Rabi frequency `omega`, in place.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cqed_evolve_resonant(state: *mut CqedState, omega: f64, t: f64) -> CqedStatus {
    update(state, |s| Ok(evolve_resonant(s, omega, t)?))
}

/// Cavity pulse of rotation `angle` (`Ω t`), in place.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cqed_cavity_pulse(state: *mut CqedState, angle: f64, omega: f64) -> CqedStatus {
    update(state, |s| Ok(cavity_pulse(s, angle, omega)?))
}

/// π/2 Ramsey zone of phase `phi` on the given transition, in place.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cqed_ramsey_pulse(state: *mut CqedState, transition_code: u32, phi: f64) -> CqedStatus {
    update(state, |s| Ok(ramsey_pulse(s, transition(transition_code)?, phi)))
}

/// Dispersive interaction with phase `epsilon` per photon, in place.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cqed_dispersive(state: *mut CqedState, epsilon: f64) -> CqedStatus {
    update(state, |s| Ok(dispersive_interaction(s, epsilon)))
}

/// Conditional phase `phi` on `|g, 1>`, in place.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cqed_phase_gate(state: *mut CqedState, phi: f64) -> CqedStatus {
    update(state, |s| Ok(conditional_phase_gate(s, phi)?))
}

/// Random stream `substream(seed, stream)`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cqed_rng_new(seed: u64, stream: u64, out: *mut *mut CqedRng) -> CqedStatus {
    guard(|| put_handle(out, || Ok(CqedRng(RngStream::substream(seed, stream)))))
}

/// # Safety
/// `rng` must be NULL or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn cqed_rng_free(rng: *mut CqedRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

/// Projective measurement of the atom; the state collapses in place.
///
/// # Safety
/// `state`, `rng` must be live handles; `level_out`, `probability` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cqed_measure_atom(
    state: *mut CqedState,
    rng: *mut CqedRng,
    level_out: *mut u32,
    probability: *mut f64,
) -> CqedStatus {
    guard(|| {
        if level_out.is_null() || probability.is_null() {
            return fail(CqedStatus::NullPointer, "output pointer is null");
        }
        let s = get_mut(state, "state")?;
        let m = measure_atom(&s.0, &mut get_mut(rng, "rng")?.0)?;
        put(level_out, level_code(m.level))?;
        put(probability, m.probability)?;
        s.0 = m.state;
        Ok(())
    })
}

/// One CNOT truth-table row with the default cavity: `control` photons
/// (0 or 1), target atom `CQED_LEVEL_G` or `CQED_LEVEL_I`.
///
/// # Safety
/// The out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cqed_cnot(
    control: u8,
    target_level: u32,
    seed: u64,
    control_out: *mut u8,
    target_out: *mut u32,
    probability: *mut f64,
) -> CqedStatus {
    guard(|| {
        if control_out.is_null() || target_out.is_null() || probability.is_null() {
            return fail(CqedStatus::NullPointer, "output pointer is null");
        }
        let cfg = ExperimentConfig { seed, ideal: true, ..ExperimentConfig::default() };
        let r = run_cnot(control, level(target_level)?, &cfg)?;
        put(control_out, r.control_out)?;
        put(target_out, level_code(r.target_out))?;
        put(probability, r.target_probability)
    })
}

/// Thermal photon trajectory probed by ideal-or-noisy QND atoms.
///
/// # Safety
/// `rng` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cqed_qnd_trajectory(
    kappa: f64,
    p1: f64,
    epsilon: f64,
    probe_interval: f64,
    dark_count_prob: f64,
    detection_efficiency: f64,
    duration: f64,
    initial_n: u8,
    rng: *mut CqedRng,
    out: *mut *mut CqedTrajectory,
) -> CqedStatus {
    guard(|| {
        put_handle(out, || {
            let bath = BathParams::new(kappa, p1)?;
            let probe = ProbeConfig::calibrated(epsilon, probe_interval, dark_count_prob, detection_efficiency)?;
            let rec = qnd_trajectory(&bath, &probe, duration, initial_n, &mut get_mut(rng, "rng")?.0)?;
            Ok(CqedTrajectory(rec))
        })
    })
}

/// # Safety
/// `trajectory` must be NULL or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn cqed_trajectory_free(trajectory: *mut CqedTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Number of jumps, 0 for a null handle.
///
/// # Safety
/// `trajectory` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cqed_trajectory_jump_count(trajectory: *const CqedTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.0.jumps.len())
}

/// Number of probe records, 0 for a null handle.
///
/// # Safety
/// `trajectory` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cqed_trajectory_probe_count(trajectory: *const CqedTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.0.probes.len())
}

/// Jump `index`: time and `CQED_JUMP_BIRTH` / `CQED_JUMP_DEATH`.
///
/// # Safety
/// `trajectory` must be a live handle; the out-pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cqed_trajectory_jump(
    trajectory: *const CqedTrajectory,
    index: usize,
    time: *mut f64,
    kind: *mut u32,
) -> CqedStatus {
    guard(|| {
        if time.is_null() || kind.is_null() {
            return fail(CqedStatus::NullPointer, "output pointer is null");
        }
        let jumps = &get(trajectory, "trajectory")?.0.jumps;
        let Some(j) = jumps.get(index) else {
            return fail(CqedStatus::OutOfRange, format!("jump {index} of {}", jumps.len()));
        };
        put(time, j.time)?;
        put(kind, if j.kind == JumpKind::Birth { CQED_JUMP_BIRTH } else { CQED_JUMP_DEATH })
    })
}

/// Probe `index`: time, detected level (`CQED_LEVEL_E` or `CQED_LEVEL_G`)
/// and the true photon number.
///
/// # Safety
/// `trajectory` must be a live handle; the out-pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cqed_trajectory_probe(
    trajectory: *const CqedTrajectory,
    index: usize,
    time: *mut f64,
    outcome: *mut u32,
    photon_number: *mut u8,
) -> CqedStatus {
    guard(|| {
        if time.is_null() || outcome.is_null() || photon_number.is_null() {
            return fail(CqedStatus::NullPointer, "output pointer is null");
        }
        let probes = &get(trajectory, "trajectory")?.0.probes;
        let Some(p) = probes.get(index) else {
            return fail(CqedStatus::OutOfRange, format!("probe {index} of {}", probes.len()));
        };
        put(time, p.time)?;
        put(outcome, if p.outcome == ProbeOutcome::E { CQED_LEVEL_E } else { CQED_LEVEL_G })?;
        put(photon_number, p.photon_number)
    })
}

/// Fraction of the run spent with one photon.
///
/// # Safety
/// `trajectory` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cqed_trajectory_occupancy(trajectory: *const CqedTrajectory, out: *mut f64) -> CqedStatus {
    guard(|| put(out, get(trajectory, "trajectory")?.0.occupancy()))
}
