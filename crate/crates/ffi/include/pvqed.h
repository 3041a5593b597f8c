#ifndef PVQED_H
#define PVQED_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum PvqedStatus {
  PVQED_STATUS_OK = 0,
  // Null pointer or invalid string argument.
  PVQED_STATUS_INVALID_ARGUMENT = 1,
  PVQED_STATUS_DEGENERATE_MASSES = 2,
  PVQED_STATUS_DOMAIN = 3,
  // Non-finite integrand or truncated series.
  PVQED_STATUS_CONVERGENCE = 4,
  PVQED_STATUS_INVALID_CONFIG = 5,
  // Malformed or inconsistent field file.
  PVQED_STATUS_PARSE = 6,
  PVQED_STATUS_IO = 7,
  // A Rust panic was caught at the boundary.
  PVQED_STATUS_INTERNAL = 8,
} PvqedStatus;

// Opaque magnetic field grid.
typedef struct PvqedField PvqedField;

// Opaque Pauli-Villars scheme.
typedef struct PvqedScheme PvqedScheme;

typedef struct PvqedQuadConfig {
  double rel_tol;
  double abs_tol;
  uint32_t max_depth;
  // 15 or 21.
  uint32_t points_per_panel;
  uint32_t max_panels;
} PvqedQuadConfig;

typedef struct PvqedEstimate {
  double value;
  double error_estimate;
  uint64_t panels_used;
  bool converged;
} PvqedEstimate;

typedef struct PvqedDensity {
  double f0;
  double ft;
  double total;
  double error_estimate;
  bool extrapolated;
  bool converged;
} PvqedDensity;

typedef struct PvqedEnergy {
  double energy;
  uint64_t cells_clipped;
  bool converged;
} PvqedEnergy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default quadrature settings.
struct PvqedQuadConfig pvqed_quad_config_default(void);

// Message describing the most recent failed call on this thread; empty
// after a successful call. The pointer stays valid until the next call
// into this library on the same thread.
const char *pvqed_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *pvqed_version(void);

// Builds a scheme with `0 < m0 < m1 < m2`.
//
// # Safety
// `out` must be valid for writes.
enum PvqedStatus pvqed_scheme_new(double m0, double m1, double m2, struct PvqedScheme **out);

// # Safety
// `scheme` must be null or a handle from `pvqed_scheme_new` not yet freed.
void pvqed_scheme_free(struct PvqedScheme *scheme);

// Writes `c0, c1, c2` to `out[0..3]`.
//
// # Safety
// `scheme` must be a live handle; `out` must point to three doubles.
enum PvqedStatus pvqed_scheme_coeffs(const struct PvqedScheme *scheme, double *out);

// # Safety
// `scheme` must be a live handle; `out` valid for writes.
enum PvqedStatus pvqed_scheme_lambda(const struct PvqedScheme *scheme, double *out);

// Zero-temperature response `M⁰(q)`.
//
// # Safety
// `scheme` must be a live handle; `cfg` null or valid; `out` valid for writes.
enum PvqedStatus pvqed_m0_response(const struct PvqedScheme *scheme,
                                   double q,
                                   const struct PvqedQuadConfig *cfg,
                                   struct PvqedEstimate *out);

// Thermal response `Mᵀ(q,β)`.
//
// # Safety
// As [`pvqed_m0_response`].
enum PvqedStatus pvqed_mt_response(const struct PvqedScheme *scheme,
                                   double q,
                                   double beta,
                                   const struct PvqedQuadConfig *cfg,
                                   struct PvqedEstimate *out);

// Vacuum energy density `f⁰_PV(a)` at field strength `a = |B|`.
//
// # Safety
// As [`pvqed_m0_response`].
enum PvqedStatus pvqed_f0_pv(const struct PvqedScheme *scheme,
                             double a,
                             const struct PvqedQuadConfig *cfg,
                             struct PvqedEstimate *out);

// Thermal energy density `fᵀ_PV(a,β)`.
//
// # Safety
// As [`pvqed_m0_response`].
enum PvqedStatus pvqed_ft_pv(const struct PvqedScheme *scheme,
                             double a,
                             double beta,
                             const struct PvqedQuadConfig *cfg,
                             struct PvqedEstimate *out);

// `f⁰_PV + fᵀ_PV` with its parts.
//
// # Safety
// As [`pvqed_m0_response`].
enum PvqedStatus pvqed_total_density(const struct PvqedScheme *scheme,
                                     double a,
                                     double beta,
                                     const struct PvqedQuadConfig *cfg,
                                     struct PvqedDensity *out);

// Loads a field grid from a CSV file with header `x,y,z,Bx,By,Bz`.
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string; `out` valid for writes.
enum PvqedStatus pvqed_field_load(const char *path, struct PvqedField **out);

// # Safety
// `field` must be null or a handle from `pvqed_field_load` not yet freed.
void pvqed_field_free(struct PvqedField *field);

// Grid dimensions `nx, ny, nz` written to `out[0..3]`.
//
// # Safety
// `field` must be a live handle; `out` must point to three `size_t`.
enum PvqedStatus pvqed_field_dims(const struct PvqedField *field, size_t *out);

// Local-density energy `Σ (f⁰_PV + fᵀ_PV)(|B|) h³` over the grid.
//
// # Safety
// `field` and `scheme` must be live handles; `cfg` null or valid; `out`
// valid for writes.
enum PvqedStatus pvqed_local_energy(const struct PvqedField *field,
                                    const struct PvqedScheme *scheme,
                                    double beta,
                                    const struct PvqedQuadConfig *cfg,
                                    struct PvqedEnergy *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PVQED_H */
