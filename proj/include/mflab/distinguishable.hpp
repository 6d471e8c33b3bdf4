#ifndef MFLAB_DISTINGUISHABLE_HPP
#define MFLAB_DISTINGUISHABLE_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mflab/fock.hpp"
#include "mflab/lattice.hpp"
#include "mflab/operator.hpp"
#include "mflab/propagate.hpp"
#include "mflab/rdm.hpp"

namespace mflab {

// Observable acting on specific particle slots (0-based, strictly increasing)
// and as the identity elsewhere.
struct SlotObservable {
    int arity = 1;
    Eigen::MatrixXcd matrix;  // d^arity x d^arity
    double op_norm = 0.0;     // spectral norm
    std::vector<int> slots;

    void validate(int d, int n_particles) const;
};

// State on the full tensor product (C^d)^{tensor N}; particle 1 is the most
// significant digit of the flat index.
struct FullState {
    int d = 0;
    int n = 0;
    Eigen::VectorXcd amplitudes;
};

inline constexpr std::int64_t kFullDenseBudget = 200'000;
inline constexpr std::int64_t kFullMatrixFreeBudget = 2'000'000;

// H_N on the full space: one-body sweeps along each particle axis plus the
// diagonal mean-field pair interaction, applied matrix-free.
class FullSpaceHamiltonian : public HermitianOp {
public:
    FullSpaceHamiltonian(const LatticeModel& model, int n_particles);

    std::int64_t dim() const override { return dim_; }
    void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const override;
    void apply_serial(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;

    bool has_dense() const override { return dim_ <= 8192; }
    Eigen::MatrixXd dense_real() const override;

    int sites() const { return d_; }
    int particles() const { return n_; }

private:
    void apply_impl(const Eigen::VectorXcd& x, Eigen::VectorXcd& y, bool parallel) const;

    const LatticeModel* model_;
    int d_, n_;
    std::int64_t dim_;
    Eigen::VectorXd diagonal_;  // (1/N) sum_{i<j} V(x_i - x_j) per configuration
};

FullState full_evolve(const LatticeModel& model, int n_particles, const FullState& state,
                      double t, const PropagatorConfig& cfg = {});

// y = A^{[slots]} x (identity on all other particles).
void apply_slot_observable(const SlotObservable& a, int d, int n_particles,
                           const Eigen::VectorXcd& x, Eigen::VectorXcd& y);

struct CommutatorEstimate {
    double value = 0.0;       // certified lower bound on the operator norm
    double residual = 0.0;    // a-posteriori ||G v - lambda v|| / lambda at the reported vector
    int iterations = 0;
    bool converged = false;
};

struct CommutatorOptions {
    int max_iterations = 300;
    double rel_tol = 1e-4;
    int restarts = 3;
    std::uint64_t seed = 12345;
};

// || [A^{[slots_A]}, e^{iHt} B^{[slots_B]} e^{-iHt}] || estimated by power
// iteration on C^dag C with matrix-free C action. Every Rayleigh quotient is a
// lower bound on the true norm, so the reported value is certified from below.
CommutatorEstimate commutator_norm(const LatticeModel& model, int n_particles,
                                   const SlotObservable& a, const SlotObservable& b, double t,
                                   const PropagatorConfig& cfg = {},
                                   const CommutatorOptions& opts = {});

// |Tr (A tensor B)(gamma^(m+n) - gamma^(m) tensor gamma^(n))| from marginals
// of a symmetric state; equals the slot-expectation covariance by symmetry.
double covariance_gap(const SymmetricState& state, const Eigen::MatrixXcd& a,
                      const Eigen::MatrixXcd& b);

// Same gap evaluated on precomputed marginals (sweeps reuse them per cell).
double covariance_gap_from_marginals(const ReducedDensity& joint, const ReducedDensity& gamma_m,
                                     const ReducedDensity& gamma_n, const Eigen::MatrixXcd& a,
                                     const Eigen::MatrixXcd& b);

// Seeded Hermitian observables with unit spectral norm (complex Gaussian,
// Hermitized, rescaled).
std::vector<Eigen::MatrixXcd> sample_observables(int d, int m, int count, std::uint64_t seed);

} // namespace mflab

#endif
