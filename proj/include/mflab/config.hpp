#ifndef MFLAB_CONFIG_HPP
#define MFLAB_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mflab {

enum class ExperimentKind { Convergence, Commutator, Covariance, Bbgky, HartreeOnly };

std::string to_string(ExperimentKind kind);

struct ModelSpec {
    int d = 0;
    double period = 0.0;
    std::string u = "zero";
    std::string v = "zero";
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Convergence;
    std::vector<int> n_list;
    std::vector<int> k_list;
    std::vector<double> t_grid;
    double dt = 1e-3;
    std::vector<std::uint64_t> seeds;
    int pairs = 50;      // commutator/covariance: observable pairs per cell
    int arity_a = 1;     // observable arities
    int arity_b = 1;
};

struct OutputSpec {
    std::string directory = "out";
    bool csv = true;
    bool json = false;
};

struct RunConfig {
    ModelSpec model;
    ExperimentSpec experiment;
    OutputSpec output;

    // canonical serialization; its FNV-1a hash is the config digest
    std::string canonical() const;
    std::string digest() const;
};

// Parse failures carry the machine-readable violation list.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : std::runtime_error(violations.empty() ? "invalid config" : violations.front()),
          violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

// Key=value sections; exact grammar in docs/config.md. Throws ConfigError on
// malformed text. Schema/guard violations are reported by validate().
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Pure schema and guard check; violations are returned, not thrown.
std::vector<std::string> validate(const RunConfig& config);

} // namespace mflab

#endif
