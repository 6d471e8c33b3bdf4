#ifndef MFLAB_PROPAGATE_HPP
#define MFLAB_PROPAGATE_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>

#include <Eigen/Dense>

#include "mflab/fock.hpp"
#include "mflab/linalg.hpp"
#include "mflab/operator.hpp"

namespace mflab {

struct PropagatorConfig {
    enum class Method { Auto, FullEig, Krylov };

    Method method = Method::Auto;
    int krylov_dim = 30;
    double step_tol = 1e-12;   // local error target per Krylov substep
    double max_step = 0.1;
    std::int64_t dense_threshold = 4000;  // Auto picks FullEig up to here

    void validate() const;
};

struct EvolveStats {
    std::int64_t renormalizations = 0;
    double max_norm_drift = 0.0;
    std::int64_t krylov_steps = 0;
    std::int64_t krylov_rejections = 0;
};

// Unitary propagation exp(-iHt), exact via dense eigendecomposition at small
// dimension, Lanczos-Krylov with adaptive substeps otherwise. Deterministic
// given the config; safe to call concurrently on distinct states.
class Propagator {
public:
    explicit Propagator(const HermitianOp& h, PropagatorConfig cfg = {});

    Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi, double t) const;
    bool uses_dense() const { return use_dense_; }
    EvolveStats stats() const;

private:
    const SymEig& spectral() const;
    Eigen::VectorXcd evolve_dense(const Eigen::VectorXcd& psi, double t) const;
    Eigen::VectorXcd evolve_krylov(const Eigen::VectorXcd& psi, double t) const;

    const HermitianOp* h_;
    PropagatorConfig cfg_;
    bool use_dense_;
    mutable std::once_flag eig_once_;
    mutable std::optional<SymEig> eig_;
    mutable std::mutex stats_mutex_;
    mutable EvolveStats stats_;
};

SymmetricState evolve(const BosonHamiltonian& h, const SymmetricState& state, double t,
                      const PropagatorConfig& cfg = {});

double energy(const HermitianOp& h, const Eigen::VectorXcd& psi);
double energy(const BosonHamiltonian& h, const SymmetricState& state);

} // namespace mflab

#endif
