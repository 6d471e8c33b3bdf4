#ifndef MFLAB_RDM_HPP
#define MFLAB_RDM_HPP

#include <cstdint>

#include <Eigen/Dense>

#include "mflab/fock.hpp"

namespace mflab {

// k-particle marginal: Hermitian, positive semidefinite, trace 1 on the
// d^k-dimensional k-particle space. Row/column multi-indices are particle
// digits with particle 1 most significant.
struct ReducedDensity {
    int k = 0;
    int d = 0;
    Eigen::MatrixXcd matrix;

    double trace() const { return matrix.trace().real(); }
};

inline constexpr std::int64_t kMarginalDimBudget = 4096;  // cap on d^k

// gamma^(1)_{pq} = <a+_q a_p> / N.
ReducedDensity one_rdm(const SymmetricState& state);

// Entries from normally ordered correlators divided by N!/(N-k)!. Computed by
// applying k annihilation operators (occupation shifts with sqrt factors) and
// taking inner products; the N-body projection is never materialized.
ReducedDensity k_rdm(const SymmetricState& state, int k);
ReducedDensity k_rdm_serial(const SymmetricState& state, int k);  // reference kernel

// Sum of |eigenvalues| of the Hermitian difference.
double trace_distance(const ReducedDensity& a, const ReducedDensity& b);

// Brute-force first-quantized oracle: embeds into (C^d)^{tensor N}, forms the
// projection and traces out the last N-k particles literally. Oracle scale only.
ReducedDensity dense_oracle_rdm(const SymmetricState& state, int k,
                                std::int64_t budget = 100'000);

// |phi><phi|^{tensor k} with trace 1.
ReducedDensity pure_power(const Eigen::VectorXcd& phi, int k);

// Partial trace over the last particle: d^k -> d^(k-1).
ReducedDensity partial_trace_last(const ReducedDensity& rho);

// Clips eigenvalues in [-1e-10, 0) to zero and renormalizes the trace; a
// negative eigenvalue below -1e-10 is a genuine invariant violation and
// throws. The clip magnitude is tracked for diagnostics.
ReducedDensity clipped_psd(const ReducedDensity& rho);

// Largest negative-eigenvalue clip applied anywhere in this run (diagnostics).
double rdm_psd_clip_magnitude();

} // namespace mflab

#endif
