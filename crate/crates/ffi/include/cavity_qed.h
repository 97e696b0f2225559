#ifndef CAVITY_QED_H
#define CAVITY_QED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define CQED_LEVEL_E 0

#define CQED_LEVEL_G 1

#define CQED_LEVEL_I 2

#define CQED_RAMSEY_EG 0

#define CQED_RAMSEY_GI 1

#define CQED_JUMP_BIRTH 0

#define CQED_JUMP_DEATH 1

/**
 * Status code of every fallible call.
 */
typedef enum CqedStatus {
  CQED_STATUS_OK = 0,
  CQED_STATUS_NULL_POINTER = 1,
  CQED_STATUS_INVALID_ARGUMENT = 2,
  CQED_STATUS_TRUNCATION = 3,
  CQED_STATUS_DIMENSION_MISMATCH = 4,
  CQED_STATUS_SUBSPACE = 5,
  CQED_STATUS_CALIBRATION = 6,
  CQED_STATUS_NUMERICAL = 7,
  CQED_STATUS_OUT_OF_RANGE = 8,
  CQED_STATUS_PANIC = 9,
} CqedStatus;

/**
 * Seeded random stream.
 */
typedef struct CqedRng CqedRng;

/**
 * Joint atom-cavity state vector.
 */
typedef struct CqedState CqedState;

/**
 * Recorded QND trajectory.
 */
typedef struct CqedTrajectory CqedTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cqed_version(void);

/**
 * Message of the last failed call on this thread, or NULL after a success.
 * Valid until the next call into the library from the same thread.
 */
const char *cqed_last_error(void);

/**
 * `|level, n>` with the field truncated at `n_max`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum CqedStatus cqed_state_basis(uint32_t level_code,
                                 size_t n,
                                 size_t n_max,
                                 struct CqedState **out);

/**
 * Atom in `level` times the coherent field `|alpha>`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum CqedStatus cqed_state_coherent(uint32_t level_code,
                                    double alpha_re,
                                    double alpha_im,
                                    size_t n_max,
                                    struct CqedState **out);

/**
 * # Safety
 * `state` must be NULL or a handle from this library not freed before.
 */
void cqed_state_free(struct CqedState *state);

/**
 * # Safety
 * `state` must be a live handle; `out` valid for a pointer write.
 */
enum CqedStatus cqed_state_clone(const struct CqedState *state, struct CqedState **out);

/**
 * Hilbert-space dimension, 0 for a null handle.
 *
 * # Safety
 * `state` must be NULL or a live handle.
 */
size_t cqed_state_dim(const struct CqedState *state);

/**
 * # Safety
 * `state` must be a live handle; `re` and `im` valid for writes.
 */
enum CqedStatus cqed_state_amplitude(const struct CqedState *state,
                                     uint32_t level_code,
                                     size_t n,
                                     double *re,
                                     double *im);

/**
 * # Safety
 * `state` must be a live handle; `out` valid for a write.
 */
enum CqedStatus cqed_state_level_probability(const struct CqedState *state,
                                             uint32_t level_code,
                                             double *out);

/**
 * `|<a|b>|²`.
 *
 * # Safety
 * `a`, `b` must be live handles; `out` valid for a write.
 */
enum CqedStatus cqed_fidelity(const struct CqedState *a, const struct CqedState *b, double *out);

/**
 * Resonant evolution for time `t` at vacuum Rabi frequency `omega`, in place.
 *
 * # Safety
 * `state` must be a live handle.
 */
enum CqedStatus cqed_evolve_resonant(struct CqedState *state, double omega, double t);

/**
 * Cavity pulse of rotation `angle` (`Ω t`), in place.
 *
 * # Safety
 * `state` must be a live handle.
 */
enum CqedStatus cqed_cavity_pulse(struct CqedState *state, double angle, double omega);

/**
 * π/2 Ramsey zone of phase `phi` on the given transition, in place.
 *
 * # Safety
 * `state` must be a live handle.
 */
enum CqedStatus cqed_ramsey_pulse(struct CqedState *state, uint32_t transition_code, double phi);

/**
 * Dispersive interaction with phase `epsilon` per photon, in place.
 *
 * # Safety
 * `state` must be a live handle.
 */
enum CqedStatus cqed_dispersive(struct CqedState *state, double epsilon);

/**
 * Conditional phase `phi` on `|g, 1>`, in place.
 *
 * # Safety
 * `state` must be a live handle.
 */
enum CqedStatus cqed_phase_gate(struct CqedState *state, double phi);

/**
 * Random stream `substream(seed, stream)`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum CqedStatus cqed_rng_new(uint64_t seed, uint64_t stream, struct CqedRng **out);

/**
 * # Safety
 * `rng` must be NULL or a handle from this library not freed before.
 */
void cqed_rng_free(struct CqedRng *rng);

/**
 * Projective measurement of the atom; the state collapses in place.
 *
 * # Safety
 * `state`, `rng` must be live handles; `level_out`, `probability` valid for writes.
 */
enum CqedStatus cqed_measure_atom(struct CqedState *state,
                                  struct CqedRng *rng,
                                  uint32_t *level_out,
                                  double *probability);

/**
 * One CNOT truth-table row with the default cavity: `control` photons
 * (0 or 1), target atom `CQED_LEVEL_G` or `CQED_LEVEL_I`.
 *
 * # Safety
 * The out-pointers must be valid for writes.
 */
enum CqedStatus cqed_cnot(uint8_t control,
                          uint32_t target_level,
                          uint64_t seed,
                          uint8_t *control_out,
                          uint32_t *target_out,
                          double *probability);

/**
 * Thermal photon trajectory probed by ideal-or-noisy QND atoms.
 *
 * # Safety
 * `rng` must be a live handle; `out` valid for a pointer write.
 */
enum CqedStatus cqed_qnd_trajectory(double kappa,
                                    double p1,
                                    double epsilon,
                                    double probe_interval,
                                    double dark_count_prob,
                                    double detection_efficiency,
                                    double duration,
                                    uint8_t initial_n,
                                    struct CqedRng *rng,
                                    struct CqedTrajectory **out);

/**
 * # Safety
 * `trajectory` must be NULL or a handle from this library not freed before.
 */
void cqed_trajectory_free(struct CqedTrajectory *trajectory);

/**
 * Number of jumps, 0 for a null handle.
 *
 * # Safety
 * `trajectory` must be NULL or a live handle.
 */
size_t cqed_trajectory_jump_count(const struct CqedTrajectory *trajectory);

/**
 * Number of probe records, 0 for a null handle.
 *
 * # Safety
 * `trajectory` must be NULL or a live handle.
 */
size_t cqed_trajectory_probe_count(const struct CqedTrajectory *trajectory);

/**
 * Jump `index`: time and `CQED_JUMP_BIRTH` / `CQED_JUMP_DEATH`.
 *
 * # Safety
 * `trajectory` must be a live handle; the out-pointers valid for writes.
 */
enum CqedStatus cqed_trajectory_jump(const struct CqedTrajectory *trajectory,
                                     size_t index,
                                     double *time,
                                     uint32_t *kind);

/**
 * Probe `index`: time, detected level (`CQED_LEVEL_E` or `CQED_LEVEL_G`)
 * and the true photon number.
 *
 * # Safety
 * `trajectory` must be a live handle; the out-pointers valid for writes.
 */
enum CqedStatus cqed_trajectory_probe(const struct CqedTrajectory *trajectory,
                                      size_t index,
                                      double *time,
                                      uint32_t *outcome,
                                      uint8_t *photon_number);

/**
 * Fraction of the run spent with one photon.
 *
 * # Safety
 * `trajectory` must be a live handle; `out` valid for a write.
 */
enum CqedStatus cqed_trajectory_occupancy(const struct CqedTrajectory *trajectory, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAVITY_QED_H */
