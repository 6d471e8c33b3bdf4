#ifndef MFLAB_BOUNDS_HPP
#define MFLAB_BOUNDS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mflab/hartree.hpp"
#include "mflab/lattice.hpp"
#include "mflab/rdm.hpp"

namespace mflab {

// One measurement row: a distance (or estimate) against its closed-form
// envelope, keyed for persistence and rate fitting.
struct ExperimentRecord {
    int n_particles = 0;
    int k = 0;
    double t = 0.0;
    double distance = 0.0;
    double envelope = 0.0;
    bool envelope_defined = true;
    std::string slope_group;
    std::uint64_t seed = 0;
    std::string model_digest;
};

// (k^2 lambda_V / N) e^{2k||V||} (e^{8||V|| t} - 1): trace-norm distance
// envelope between the k-particle marginal and the Hartree product.
double trace_distance_envelope(int k, int n_particles, double t, double sup_norm_v,
                               double lambda_v);

// (m n ||A|| ||B|| / N)(e^{4||V|| |t|} - 1): growth envelope for the
// commutator of slot observables in the Heisenberg picture.
double commutator_growth_envelope(int m, int n, int n_particles, double t, double sup_norm_v,
                                  double norm_a, double norm_b);

// (m n ||A|| ||B|| / N)(e^{8||V|| t} - 1): covariance (factorization-gap)
// envelope for product observables against marginals.
double covariance_growth_envelope(int m, int n, int n_particles, double t, double sup_norm_v,
                                  double norm_a, double norm_b);

struct MarginalSnapshot {
    double time = 0.0;
    ReducedDensity gamma_k;
    ReducedDensity gamma_k1;
};

// Max over interior snapshots of the trace-norm residual of the finite-N
// marginal hierarchy, with i d/dt gamma^(k) taken by centered differences:
//   i d/dt gamma^(k) = sum_j [h_j, gamma^(k)] + (1/N) sum_{i<j<=k} [V_ij, gamma^(k)]
//                      + ((N-k)/N) sum_j Tr_{k+1} [V_{j,k+1}, gamma^(k+1)].
// Converges to 0 at O(dt^2) on exact trajectories.
double bbgky_residual(const std::vector<MarginalSnapshot>& trajectory, const LatticeModel& model,
                      int n_particles, int k);

// Same residual for the factorized limit hierarchy (no 1/N terms), with
// gamma^(k) = |phi_t><phi_t|^k built from a Hartree trajectory.
double infinite_hierarchy_residual(const std::vector<HartreeOrbital>& trajectory,
                                   const LatticeModel& model, int k);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int used_points = 0;
    int excluded_points = 0;  // nonpositive or below the noise floor
};

inline constexpr double kRateFitFloor = 1e-9;

// Least squares of log(distance) against log(N). Points with distance below
// the noise floor are excluded (their log is meaningless).
RateFit fit_rate(std::span<const std::pair<double, double>> n_distance);

// Hierarchy right-hand sides on dense k-particle matrices (exposed for tests).
Eigen::MatrixXcd bbgky_rhs(const ReducedDensity& gamma_k, const ReducedDensity& gamma_k1,
                           const LatticeModel& model, int n_particles);
Eigen::MatrixXcd infinite_hierarchy_rhs(const ReducedDensity& gamma_k,
                                        const ReducedDensity& gamma_k1,
                                        const LatticeModel& model);

} // namespace mflab

#endif
