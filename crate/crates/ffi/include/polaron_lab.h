/* SPDX-License-Identifier: Apache-2.0 */

#ifndef POLARON_LAB_H
#define POLARON_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_POINTER = 1,
  PL_STATUS_INVALID_ARGUMENT = 2,
  PL_STATUS_GRID_MISMATCH = 3,
  PL_STATUS_BLOW_UP = 4,
  PL_STATUS_NOT_CONTRACTING = 5,
  PL_STATUS_CONFIG_ERROR = 6,
  PL_STATUS_IO_ERROR = 7,
  PL_STATUS_INTERNAL = 8,
  PL_STATUS_PANIC = 9,
} PlStatus;

typedef enum PlFlow {
  PL_FLOW_LANDAU_PEKAR = 0,
  PL_FLOW_DRESSED = 1,
} PlFlow;

typedef struct PlFormFactors PlFormFactors;

typedef struct PlGrid PlGrid;

typedef struct PlState PlState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copy the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len`). Returns the full message length without the NUL.
 */
uintptr_t pl_last_error(char *buf, uintptr_t len);

enum PlStatus pl_grid_new(uintptr_t dim, uintptr_t n, double box_len, struct PlGrid **grid);

/*
 Number of grid points, or 0 for a null handle.
 */
uintptr_t pl_grid_size(const struct PlGrid *grid);

void pl_grid_free(struct PlGrid *grid);

/*
 A non-positive or non-finite `sigma` means no ultraviolet cutoff.
 */
enum PlStatus pl_form_factors_new(const struct PlGrid *grid,
                                  double sigma0,
                                  double sigma,
                                  struct PlFormFactors **ff);

void pl_form_factors_free(struct PlFormFactors *ff);

/*
 State from interleaved fields; a null field is taken as zero.
 */
enum PlStatus pl_state_new(const struct PlGrid *grid,
                           const double *u,
                           const double *alpha,
                           struct PlState **state);

enum PlStatus pl_state_random_smooth(const struct PlGrid *grid,
                                     double bandwidth,
                                     double mass,
                                     double phonon_norm2,
                                     uint64_t seed,
                                     struct PlState **state);

/*
 Copy the fields out; either destination may be null.
 */
enum PlStatus pl_state_fields(const struct PlState *state, double *u, double *alpha);

/*
 Electron mass, or NaN for a null handle.
 */
double pl_state_mass(const struct PlState *state);

void pl_state_free(struct PlState *state);

enum PlStatus pl_energy(const struct PlState *state,
                        const struct PlFormFactors *ff,
                        enum PlFlow flow,
                        double *energy);

/*
 New state `D(theta) state`.
 */
enum PlStatus pl_dress(const struct PlState *state,
                       const struct PlFormFactors *ff,
                       double theta,
                       struct PlState **result);

/*
 Strang-split evolution to `t_end`; a blow-up returns `BlowUp`.
 */
enum PlStatus pl_evolve(const struct PlState *state,
                        const struct PlFormFactors *ff,
                        enum PlFlow flow,
                        double dt,
                        double t_end,
                        struct PlState **result);

/*
 Run a TOML configuration and write its artifacts to `out_dir`.
 `passed` receives the overall verdict.
 */
enum PlStatus pl_run_config(const char *config_toml, const char *out_dir, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLARON_LAB_H */
