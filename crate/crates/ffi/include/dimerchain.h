#ifndef DIMERCHAIN_H
#define DIMERCHAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum DcStatus {
  DC_STATUS_OK = 0,
  DC_STATUS_NULL_POINTER = 1,
  DC_STATUS_INVALID_ARGUMENT = 2,
  DC_STATUS_INVALID_GEOMETRY = 3,
  DC_STATUS_INVALID_PARAMS = 4,
  DC_STATUS_DOMAIN = 5,
  DC_STATUS_SINGULAR = 6,
  DC_STATUS_ILL_CONDITIONED = 7,
  DC_STATUS_DISORDER_TOO_STRONG = 8,
  DC_STATUS_PANIC = 9,
} DcStatus;

typedef enum DcWaveguide {
  DC_WAVEGUIDE_CHIRAL = 0,
  DC_WAVEGUIDE_BIDIRECTIONAL = 1,
} DcWaveguide;

typedef enum DcDisorderTarget {
  DC_DISORDER_TARGET_DIMER_LENGTH = 0,
  DC_DISORDER_TARGET_DIMER_SEPARATION = 1,
} DcDisorderTarget;

typedef enum DcDisorderUnits {
  DC_DISORDER_UNITS_LENGTH_NM = 0,
  DC_DISORDER_UNITS_PHASE_RADIANS = 1,
} DcDisorderUnits;

/*
 Opaque chain geometry.
 */
typedef struct DcGeometry DcGeometry;

/*
 Opaque waveguide and coupling parameters.
 */
typedef struct DcParams DcParams;

/*
 Response of a chain at one detuning.
 */
typedef struct DcScattering {
  double t_re;
  double t_im;
  double r_re;
  double r_im;
  double transmission;
  double reflection;
  /*
   `ln T`; finite even where `transmission` underflows to zero.
   */
  double ln_transmission;
} DcScattering;

/*
 Localization fit of `<ln T>` against the number of dimers.
 */
typedef struct DcLocalization {
  /*
   Localization length in dimers; `+inf` when `<ln T>` does not decay.
   */
  double xi;
  double xi_stderr;
  double slope;
  double slope_stderr;
  double intercept;
  double r_squared;
} DcLocalization;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, a static NUL-terminated string.
 */
const char *dc_version(void);

/*
 Message of the last failed call on this thread (empty after a success).
 The pointer stays valid until the next call into the library on this thread.
 */
const char *dc_last_error_message(void);

/*
 Near-field dipole-dipole coupling at `distance_nm`, in units of Γ₀.

 # Safety
 `out` must be NULL or valid for writing one `double`.
 */
enum DcStatus dc_dipole_coupling(double distance_nm,
                                 double lambda_nm,
                                 double prefactor,
                                 double *out);

/*
 Periodic chain of `dimers` dimers.

 # Safety
 `out` must be NULL or valid for writing one pointer.
 */
enum DcStatus dc_geometry_periodic(size_t dimers,
                                   double length_nm,
                                   double separation_nm,
                                   struct DcGeometry **out);

/*
 Chain from `count` sorted atom positions (nm); consecutive pairs form dimers.

 # Safety
 `positions` must point to `count` readable doubles; `out` must be NULL or
 valid for writing one pointer.
 */
enum DcStatus dc_geometry_from_positions(const double *positions,
                                         size_t count,
                                         struct DcGeometry **out);

/*
 Number of dimers, or 0 for NULL.

 # Safety
 `geometry` must be NULL or a live handle.
 */
size_t dc_geometry_dimer_count(const struct DcGeometry *geometry);

/*
 Releases a geometry. NULL is ignored.

 # Safety
 `geometry` must be NULL or a handle not yet freed.
 */
void dc_geometry_free(struct DcGeometry *geometry);

/*
 Parameters with the same coupling `j` for every dimer. Rates are in
 units of Γ₀; `gamma` is the decay rate into each guided mode and `loss`
 the rate into everything else.

 # Safety
 `out` must be NULL or valid for writing one pointer.
 */
enum DcStatus dc_params_new(enum DcWaveguide waveguide,
                            double gamma,
                            double loss,
                            double lambda_nm,
                            double j,
                            struct DcParams **out);

/*
 Parameters whose coupling follows the near-field law of each dimer's
 length, scaled so that a dimer of `anchor_length_nm` has coupling `j`.

 # Safety
 `out` must be NULL or valid for writing one pointer.
 */
enum DcStatus dc_params_new_anchored(enum DcWaveguide waveguide,
                                     double gamma,
                                     double loss,
                                     double lambda_nm,
                                     double j,
                                     double anchor_length_nm,
                                     struct DcParams **out);

/*
 Releases parameters. NULL is ignored.

 # Safety
 `params` must be NULL or a handle not yet freed.
 */
void dc_params_free(struct DcParams *params);

/*
 Transmission and reflection of a chain at detuning `delta` (units of Γ₀),
 using the transfer-matrix route for two-way waveguides.

 # Safety
 `geometry` and `params` must be live handles; `out` must be NULL or valid
 for writing one `DcScattering`.
 */
enum DcStatus dc_chain_transmission(const struct DcGeometry *geometry,
                                    const struct DcParams *params,
                                    double delta,
                                    struct DcScattering *out);

/*
 As [`dc_chain_transmission`], but solving the full linear system for
 two-way waveguides. Slower; intended as a cross-check.

 # Safety
 Same as [`dc_chain_transmission`].
 */
enum DcStatus dc_chain_transmission_dense(const struct DcGeometry *geometry,
                                          const struct DcParams *params,
                                          double delta,
                                          struct DcScattering *out);

/*
 Localization length of a disordered chain built around a periodic base
 (`length_nm`, `separation_nm`). `<ln T>` is averaged over `realizations`
 at each of the `n_count` strictly increasing dimer counts in `n_values`
 and fitted against `n`. Results depend only on the inputs and `seed`.

 # Safety
 `params` must be a live handle, `n_values` must point to `n_count`
 readable values, and `out` must be NULL or valid for writing one
 `DcLocalization`.
 */
enum DcStatus dc_localization(const struct DcParams *params,
                              double length_nm,
                              double separation_nm,
                              enum DcDisorderTarget target,
                              enum DcDisorderUnits units,
                              double sigma,
                              double delta,
                              const size_t *n_values,
                              size_t n_count,
                              uint64_t realizations,
                              uint64_t seed,
                              struct DcLocalization *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIMERCHAIN_H */
