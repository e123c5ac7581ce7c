#ifndef CRIT_H
#define CRIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CritAlgorithm {
  CRIT_ALGORITHM_SWENDSEN_WANG = 0,
  CRIT_ALGORITHM_WOLFF = 1,
} CritAlgorithm;

typedef enum CritBoundary {
  CRIT_BOUNDARY_FREE = 0,
  CRIT_BOUNDARY_PLUS = 1,
  CRIT_BOUNDARY_MINUS = 2,
} CritBoundary;

typedef enum CritStatus {
  CRIT_STATUS_OK = 0,
  CRIT_STATUS_INVALID_ARGUMENT = 1,
  CRIT_STATUS_NULL_POINTER = 2,
  CRIT_STATUS_IO = 3,
  CRIT_STATUS_PANIC = 4,
  CRIT_STATUS_INTERNAL = 5,
} CritStatus;

// Markov chain bound to a copy of a lattice.
typedef struct CritChain CritChain;

// Square grid with its boundary condition.
typedef struct CritLattice CritLattice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *crit_last_error_message(void);

// `ln(1 + √2) / 2`.
double crit_critical_beta(void);

// `2 − √2`.
double crit_critical_bond_probability(void);

// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum CritStatus crit_lattice_new(size_t n_side,
                                 enum CritBoundary boundary,
                                 struct CritLattice **out);

// # Safety
// `lattice` must be null or a handle from [`crit_lattice_new`] not yet freed.
void crit_lattice_free(struct CritLattice *lattice);

// Number of sites, or 0 for a null handle.
//
// # Safety
// `lattice` must be null or a live lattice handle.
size_t crit_lattice_site_count(const struct CritLattice *lattice);

// Creates a chain and runs its thermalization sweeps.
//
// # Safety
// `lattice` must be a live lattice handle and `out` valid for one write.
enum CritStatus crit_chain_new(const struct CritLattice *lattice,
                               enum CritAlgorithm algorithm,
                               uint64_t seed,
                               uint64_t stream,
                               size_t thermalization_sweeps,
                               size_t decorrelation_sweeps,
                               struct CritChain **out);

// # Safety
// `chain` must be null or a handle from [`crit_chain_new`] not yet freed.
void crit_chain_free(struct CritChain *chain);

// Advances to the next retained sample.
//
// # Safety
// `chain` must be a live chain handle not used concurrently.
enum CritStatus crit_chain_next(struct CritChain *chain);

// Copies the current spins (row-major, ±1) into `buf`, which must hold
// exactly the lattice site count.
//
// # Safety
// `buf` must be valid for `len` writes.
enum CritStatus crit_chain_spins(const struct CritChain *chain, int8_t *buf, size_t len);

// Renormalized magnetization `a^{15/8} Σ σ` of the current sample.
//
// # Safety
// `out` must be valid for one write.
enum CritStatus crit_chain_magnetization(const struct CritChain *chain, double *out);

// Truncated `‖Φ^a‖²_{H^{-alpha}}` of the current sample with `j_max`
// sine modes per axis.
//
// # Safety
// `out` must be valid for one write.
enum CritStatus crit_chain_sobolev_norm(const struct CritChain *chain,
                                        double alpha,
                                        size_t j_max,
                                        double *out);

// `∬ |x − y|^{−s}` over the unit square squared, for `0 ≤ s < 2`.
//
// # Safety
// `out` must be valid for one write.
enum CritStatus crit_riesz_integral(double s, double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CRIT_H */
