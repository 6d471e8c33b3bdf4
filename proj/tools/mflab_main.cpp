#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mflab/config.hpp"
#include "mflab/errors.hpp"
#include "mflab/experiments.hpp"
#include "mflab/version.hpp"

namespace {

// exit codes: 0 ok, 2 config error, 3 budget refusal, 4 invariant violation
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitInvariant = 4;

void emit_errors(const std::vector<std::string>& messages) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& m : messages) out.push_back(m);
    std::cerr << out.dump() << "\n";
}

int cmd_validate(const std::string& path) {
    try {
        const mflab::RunConfig cfg = mflab::load_run_config(path);
        const auto violations = mflab::validate(cfg);
        if (violations.empty()) {
            std::cout << "ok\n";
            return 0;
        }
        nlohmann::json out = nlohmann::json::array();
        for (const auto& v : violations) out.push_back(v);
        std::cout << out.dump(1) << "\n";
        return kExitConfig;
    } catch (const mflab::ConfigError& e) {
        emit_errors(e.violations());
        return kExitConfig;
    }
}

int cmd_run(const std::string& path) {
    try {
        const mflab::RunConfig cfg = mflab::load_run_config(path);
        mflab::run_experiments(cfg, std::cout);
        return 0;
    } catch (const mflab::ConfigError& e) {
        emit_errors(e.violations());
        return kExitConfig;
    } catch (const mflab::BudgetError& e) {
        emit_errors({std::string("budget refusal: ") + e.what()});
        return kExitBudget;
    } catch (const mflab::InvariantViolation& e) {
        emit_errors({std::string("invariant violation: ") + e.what()});
        return kExitInvariant;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice laboratory for mean-field quantum dynamics"};
    app.require_subcommand(1);

    std::string run_path, validate_path;
    auto* run = app.add_subcommand("run", "execute the experiment described by a config file");
    run->add_option("config", run_path, "config file")->required();
    auto* val = app.add_subcommand("validate", "check a config file without running anything");
    val->add_option("config", validate_path, "config file")->required();
    auto* ver = app.add_subcommand("version", "print the tool version");

    CLI11_PARSE(app, argc, argv);

    if (ver->parsed()) {
        std::cout << "mflab " << MFLAB_VERSION << "\n";
        return 0;
    }
    if (val->parsed()) return cmd_validate(validate_path);
    return cmd_run(run_path);
}
