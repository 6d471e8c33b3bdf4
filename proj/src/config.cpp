#include "mflab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mflab/distinguishable.hpp"
#include "mflab/fock.hpp"
#include "mflab/lattice.hpp"

namespace mflab {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Convergence: return "convergence";
        case ExperimentKind::Commutator: return "commutator";
        case ExperimentKind::Covariance: return "covariance";
        case ExperimentKind::Bbgky: return "bbgky";
        case ExperimentKind::HartreeOnly: return "hartree-only";
    }
    return "?";
}

std::string RunConfig::canonical() const {
    std::ostringstream out;
    out << "[model]\n";
    out << "d = " << model.d << "\n";
    out << "period = " << fmt17(model.period) << "\n";
    out << "u = " << PotentialShape::parse(model.u).canonical() << "\n";
    out << "v = " << PotentialShape::parse(model.v).canonical() << "\n";
    out << "[experiment]\n";
    out << "kind = " << to_string(experiment.kind) << "\n";
    const auto join = [&out](const char* key, const auto& list, auto fmt) {
        out << key << " = ";
        for (std::size_t i = 0; i < list.size(); ++i) out << (i ? "," : "") << fmt(list[i]);
        out << "\n";
    };
    join("n", experiment.n_list, [](int v) { return std::to_string(v); });
    join("k", experiment.k_list, [](int v) { return std::to_string(v); });
    join("t", experiment.t_grid, fmt17);
    out << "dt = " << fmt17(experiment.dt) << "\n";
    join("seeds", experiment.seeds, [](std::uint64_t v) { return std::to_string(v); });
    out << "pairs = " << experiment.pairs << "\n";
    out << "arity_a = " << experiment.arity_a << "\n";
    out << "arity_b = " << experiment.arity_b << "\n";
    out << "[output]\n";
    out << "directory = " << output.directory << "\n";
    out << "formats = " << (output.csv ? "csv" : "") << (output.csv && output.json ? "," : "")
        << (output.json ? "json" : "") << "\n";
    return out.str();
}

std::string RunConfig::digest() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical())));
    return buf;
}

RunConfig parse_run_config(const std::string& text) {
    std::vector<std::string> errors;
    RunConfig cfg;
    bool saw_model = false, saw_experiment = false, saw_output = false;

    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": unterminated section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section == "model") saw_model = true;
            else if (section == "experiment") saw_experiment = true;
            else if (section == "output") saw_output = true;
            else errors.push_back("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto fail = [&](const std::string& msg) {
            errors.push_back("line " + std::to_string(lineno) + ": " + key + ": " + msg);
        };

        try {
            if (section == "model") {
                if (key == "d") cfg.model.d = std::stoi(value);
                else if (key == "period") cfg.model.period = std::stod(value);
                else if (key == "u") cfg.model.u = value;
                else if (key == "v") cfg.model.v = value;
                else fail("unknown key in [model]");
            } else if (section == "experiment") {
                if (key == "kind") {
                    if (value == "convergence") cfg.experiment.kind = ExperimentKind::Convergence;
                    else if (value == "commutator") cfg.experiment.kind = ExperimentKind::Commutator;
                    else if (value == "covariance") cfg.experiment.kind = ExperimentKind::Covariance;
                    else if (value == "bbgky") cfg.experiment.kind = ExperimentKind::Bbgky;
                    else if (value == "hartree-only") cfg.experiment.kind = ExperimentKind::HartreeOnly;
                    else fail("unknown experiment kind '" + value + "'");
                } else if (key == "n") {
                    cfg.experiment.n_list.clear();
                    for (const auto& item : split_list(value))
                        cfg.experiment.n_list.push_back(std::stoi(item));
                } else if (key == "k") {
                    cfg.experiment.k_list.clear();
                    for (const auto& item : split_list(value))
                        cfg.experiment.k_list.push_back(std::stoi(item));
                } else if (key == "t") {
                    cfg.experiment.t_grid.clear();
                    for (const auto& item : split_list(value))
                        cfg.experiment.t_grid.push_back(std::stod(item));
                } else if (key == "dt") {
                    cfg.experiment.dt = std::stod(value);
                } else if (key == "seeds") {
                    cfg.experiment.seeds.clear();
                    for (const auto& item : split_list(value))
                        cfg.experiment.seeds.push_back(std::stoull(item));
                } else if (key == "pairs") {
                    cfg.experiment.pairs = std::stoi(value);
                } else if (key == "arity_a") {
                    cfg.experiment.arity_a = std::stoi(value);
                } else if (key == "arity_b") {
                    cfg.experiment.arity_b = std::stoi(value);
                } else {
                    fail("unknown key in [experiment]");
                }
            } else if (section == "output") {
                if (key == "directory") cfg.output.directory = value;
                else if (key == "formats") {
                    cfg.output.csv = false;
                    cfg.output.json = false;
                    for (const auto& item : split_list(value)) {
                        if (item == "csv") cfg.output.csv = true;
                        else if (item == "json") cfg.output.json = true;
                        else fail("unknown format '" + item + "'");
                    }
                } else fail("unknown key in [output]");
            } else {
                fail("key outside of any [section]");
            }
        } catch (const std::exception&) {
            fail("bad value '" + value + "'");
        }
    }

    if (!saw_model) errors.push_back("missing [model] section");
    if (!saw_experiment) errors.push_back("missing [experiment] section");
    if (!saw_output) errors.push_back("missing [output] section");
    if (!errors.empty()) throw ConfigError(std::move(errors));

    if (const char* dir = std::getenv("OUTPUT_DIR"); dir && *dir) cfg.output.directory = dir;
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::vector<std::string> validate(const RunConfig& cfg) {
    std::vector<std::string> v;
    const auto& e = cfg.experiment;

    if (cfg.model.d < 1) v.push_back("model.d: site count must be at least 1");
    if (!(cfg.model.period > 0.0) || !std::isfinite(cfg.model.period))
        v.push_back("model.period: must be positive and finite");
    const std::pair<const std::string*, const char*> shapes[] = {{&cfg.model.u, "model.u"},
                                                                 {&cfg.model.v, "model.v"}};
    for (const auto& [spec, name] : shapes) {
        try {
            PotentialShape::parse(*spec);
        } catch (const std::exception& ex) {
            v.push_back(std::string(name) + ": " + ex.what());
        }
    }

    if (e.n_list.empty()) v.push_back("experiment.n: list must be nonempty");
    if (e.t_grid.empty()) v.push_back("experiment.t: list must be nonempty");
    if (e.seeds.empty()) v.push_back("experiment.seeds: list must be nonempty (seeding is mandatory)");
    for (std::size_t i = 1; i < e.t_grid.size(); ++i)
        if (!(e.t_grid[i] > e.t_grid[i - 1])) {
            v.push_back("experiment.t: grid must be strictly ascending");
            break;
        }
    for (double t : e.t_grid)
        if (!std::isfinite(t) || t < 0.0) {
            v.push_back("experiment.t: values must be finite and nonnegative");
            break;
        }
    if (!(e.dt > 0.0) || !std::isfinite(e.dt)) v.push_back("experiment.dt: must be positive");
    for (int n : e.n_list)
        if (n < 1) {
            v.push_back("experiment.n: particle numbers must be at least 1");
            break;
        }

    const bool needs_k =
        e.kind == ExperimentKind::Convergence || e.kind == ExperimentKind::Bbgky;
    if (needs_k) {
        if (e.k_list.empty()) v.push_back("experiment.k: list must be nonempty");
        for (int k : e.k_list)
            if (k < 1) {
                v.push_back("experiment.k: marginal orders must be at least 1");
                break;
            }
        if (!e.k_list.empty() && !e.n_list.empty()) {
            const int kmax = *std::max_element(e.k_list.begin(), e.k_list.end());
            const int nmin = *std::min_element(e.n_list.begin(), e.n_list.end());
            if (e.kind == ExperimentKind::Bbgky && nmin < kmax + 1)
                v.push_back("experiment.n: bbgky runs need every N >= max(k)+1");
            if (e.kind == ExperimentKind::Convergence && nmin < kmax)
                v.push_back("experiment.n: convergence runs need every N >= max(k)");
            if (cfg.model.d >= 1) {
                std::int64_t dk = 1;
                bool over = false;
                for (int i = 0; i < kmax; ++i) {
                    if (__builtin_mul_overflow(dk, static_cast<std::int64_t>(cfg.model.d), &dk) ||
                        dk > kMarginalDimBudget) {
                        over = true;
                        break;
                    }
                }
                if (over)
                    v.push_back("budget: d^k exceeds the marginal-dimension cap " +
                                std::to_string(kMarginalDimBudget));
            }
        }
    }

    const bool sampling =
        e.kind == ExperimentKind::Commutator || e.kind == ExperimentKind::Covariance;
    if (sampling) {
        if (e.pairs < 1) v.push_back("experiment.pairs: must be at least 1");
        if (e.arity_a < 1 || e.arity_b < 1)
            v.push_back("experiment.arity_a/arity_b: must be at least 1");
        if (!e.n_list.empty()) {
            const int nmin = *std::min_element(e.n_list.begin(), e.n_list.end());
            if (e.arity_a + e.arity_b > nmin)
                v.push_back("experiment.n: need arity_a + arity_b <= N for every N");
        }
    }

    if (e.kind == ExperimentKind::Commutator && cfg.model.d >= 1 && !e.n_list.empty()) {
        const int nmax = *std::max_element(e.n_list.begin(), e.n_list.end());
        std::int64_t dim = 1;
        for (int i = 0; i < nmax; ++i) {
            if (__builtin_mul_overflow(dim, static_cast<std::int64_t>(cfg.model.d), &dim) ||
                dim > kFullMatrixFreeBudget) {
                v.push_back("budget: d^N exceeds the full-space cap " +
                            std::to_string(kFullMatrixFreeBudget));
                break;
            }
        }
    }

    if (!cfg.output.csv && !cfg.output.json)
        v.push_back("output.formats: at least one of csv, json required");
    if (cfg.output.directory.empty()) v.push_back("output.directory: must not be empty");
    return v;
}

} // namespace mflab
