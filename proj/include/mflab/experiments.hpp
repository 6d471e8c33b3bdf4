#ifndef MFLAB_EXPERIMENTS_HPP
#define MFLAB_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mflab/config.hpp"

namespace mflab {

struct ConvergenceRow {
    int n = 0;
    int k = 0;
    double t = 0.0;
    double distance = 0.0;
    std::optional<double> envelope;  // empty when V = 0
};

struct SampledBoundRow {  // commutator and covariance sweeps
    int m = 1;
    int n_arity = 1;
    int n_particles = 0;
    double t = 0.0;
    double value = 0.0;  // estimate / gap
    double envelope = 0.0;
    double slack = 0.0;  // envelope - value
};

struct BbgkyRow {
    int k = 0;
    int n_particles = 0;
    double dt = 0.0;
    double residual = 0.0;
};

struct HartreeRow {
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
};

struct RunOutcome {
    std::vector<ConvergenceRow> convergence;
    std::vector<SampledBoundRow> commutator;
    std::vector<SampledBoundRow> covariance;
    std::vector<BbgkyRow> bbgky;
    std::vector<HartreeRow> hartree;
    std::vector<std::string> files_written;
    double wall_seconds = 0.0;
};

// Deterministic initial orbital shared by all experiment kinds: complex
// standard normal entries from the master seed, normalized.
Eigen::VectorXcd initial_orbital(int d, std::uint64_t master_seed);

// Executes a validated config and writes the configured outputs. Throws
// ConfigError / BudgetError / InvariantViolation; the CLI maps those to
// exit codes 2 / 3 / 4.
RunOutcome run_experiments(const RunConfig& config, std::ostream& log);

} // namespace mflab

#endif
