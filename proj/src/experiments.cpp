#include "mflab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <tuple>

#include <json.hpp>

#include "mflab/bounds.hpp"
#include "mflab/distinguishable.hpp"
#include "mflab/errors.hpp"
#include "mflab/fock.hpp"
#include "mflab/hartree.hpp"
#include "mflab/lattice.hpp"
#include "mflab/propagate.hpp"
#include "mflab/rdm.hpp"
#include "mflab/rng.hpp"
#include "mflab/version.hpp"

namespace mflab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void check_marginal(const ReducedDensity& rho, const char* where) {
    const double tr = rho.trace();
    if (std::abs(tr - 1.0) > 1e-10)
        throw InvariantViolation(std::string(where) + ": marginal trace " + fmt17(tr) +
                                 " deviates from 1 beyond 1e-10");
}

void check_propagator(const Propagator& prop, const char* where) {
    const EvolveStats stats = prop.stats();
    if (stats.max_norm_drift > 1e-6)
        throw InvariantViolation(std::string(where) + ": propagator norm drift " +
                                 fmt17(stats.max_norm_drift) + " beyond 1e-6");
}

struct Sink {
    fs::path dir;
    std::vector<std::string>* files;

    std::ofstream open(const std::string& name) const {
        const fs::path p = dir / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        files->push_back(p.string());
        return out;
    }
};

json rdm_to_json(const ReducedDensity& rho) {
    json re = json::array(), im = json::array();
    for (Eigen::Index r = 0; r < rho.matrix.rows(); ++r)
        for (Eigen::Index c = 0; c < rho.matrix.cols(); ++c) {
            re.push_back(rho.matrix(r, c).real());
            im.push_back(rho.matrix(r, c).imag());
        }
    return {{"k", rho.k}, {"d", rho.d}, {"real", re}, {"imag", im}};
}

// ---- convergence ---------------------------------------------------------

void run_convergence(const RunConfig& cfg, const LatticeModel& model, RunOutcome& out,
                     const Sink& sink, json& extra_manifest) {
    const auto& e = cfg.experiment;
    const Eigen::VectorXcd phi0 = initial_orbital(model.sites(), e.seeds[0]);
    const bool env_defined = model.lambda_v().has_value();

    // Hartree trajectory at the grid times, integrated segment by segment
    std::vector<HartreeOrbital> orbitals;
    {
        HartreeOrbital cur{phi0, 0.0};
        double t_prev = 0.0;
        for (double t : e.t_grid) {
            if (t > t_prev) cur = hartree_solve_adaptive(model, cur, t - t_prev, e.dt);
            orbitals.push_back(cur);
            t_prev = t;
        }
    }

    json rdm_records = json::array();
    for (int n : e.n_list) {
        auto basis = std::make_shared<OccupationBasis>(model.sites(), n);
        BosonHamiltonian h(model, n, basis);
        Propagator prop(h);
        SymmetricState state = product_state(phi0, n, basis);

        double t_prev = 0.0;
        for (std::size_t ti = 0; ti < e.t_grid.size(); ++ti) {
            const double t = e.t_grid[ti];
            if (t > t_prev) state.amplitudes = prop.evolve(state.amplitudes, t - t_prev);
            t_prev = t;
            for (int k : e.k_list) {
                if (k > n) continue;
                const ReducedDensity gamma = k_rdm(state, k);
                check_marginal(gamma, "convergence");
                const double dist =
                    trace_distance(gamma, pure_power(orbitals[ti].phi, k));
                ConvergenceRow row{n, k, t, dist, std::nullopt};
                if (env_defined)
                    row.envelope = trace_distance_envelope(k, n, t, model.sup_norm_v(),
                                                           *model.lambda_v());
                out.convergence.push_back(row);
                if (cfg.output.json && ti + 1 == e.t_grid.size()) {
                    json rec = rdm_to_json(gamma);
                    rec["n"] = n;
                    rec["t"] = t;
                    rdm_records.push_back(std::move(rec));
                }
            }
        }
        check_propagator(prop, "convergence");
    }

    std::sort(out.convergence.begin(), out.convergence.end(), [](const auto& a, const auto& b) {
        return std::tie(a.n, a.k, a.t) < std::tie(b.n, b.k, b.t);
    });

    if (cfg.output.csv) {
        auto csv = sink.open("convergence.csv");
        csv << "N,k,t,distance,envelope,ratio\n";
        for (const auto& r : out.convergence) {
            csv << r.n << ',' << r.k << ',' << fmt17(r.t) << ',' << fmt17(r.distance) << ',';
            if (r.envelope) csv << fmt17(*r.envelope) << ',' << fmt17(r.distance / *r.envelope);
            else csv << "undefined,undefined";
            csv << '\n';
        }
    }
    if (cfg.output.json) {
        json rows = json::array();
        for (const auto& r : out.convergence) {
            json jr{{"N", r.n}, {"k", r.k}, {"t", r.t}, {"distance", r.distance}};
            jr["envelope"] = r.envelope ? json(*r.envelope) : json(nullptr);
            jr["slope_group"] = "k" + std::to_string(r.k) + "_t" + fmt17(r.t);
            jr["seed"] = e.seeds[0];
            jr["model_digest"] = model.digest();
            rows.push_back(std::move(jr));
        }
        auto jf = sink.open("convergence.json");
        jf << rows.dump(1) << '\n';
        auto rf = sink.open("rdm_final.json");
        rf << rdm_records.dump(1) << '\n';
    }
    extra_manifest["rows"] = out.convergence.size();
}

// ---- commutator ----------------------------------------------------------

void run_commutator(const RunConfig& cfg, const LatticeModel& model, RunOutcome& out,
                    const Sink& sink) {
    const auto& e = cfg.experiment;
    const int ma = e.arity_a, nb = e.arity_b;

    struct Cell {
        int n;
        std::size_t ti;
        std::uint64_t seed;
        int pair;
    };
    std::vector<Cell> cells;
    for (int n : e.n_list)
        for (std::size_t ti = 0; ti < e.t_grid.size(); ++ti)
            for (std::uint64_t seed : e.seeds)
                for (int p = 0; p < e.pairs; ++p) cells.push_back({n, ti, seed, p});

    out.commutator.resize(cells.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const Cell& cell = cells[ci];
        const double t = e.t_grid[cell.ti];
        SlotObservable a{ma,
                         sample_observables(model.sites(), ma, 1,
                                            derive_seed(cell.seed, cell.n, cell.ti, cell.pair * 4))
                             .front(),
                         1.0,
                         {}};
        SlotObservable b{nb,
                         sample_observables(model.sites(), nb, 1,
                                            derive_seed(cell.seed, cell.n, cell.ti, cell.pair * 4 + 1))
                             .front(),
                         1.0,
                         {}};
        for (int i = 0; i < ma; ++i) a.slots.push_back(i);
        for (int i = 0; i < nb; ++i) b.slots.push_back(ma + i);

        CommutatorOptions opts;
        opts.seed = derive_seed(cell.seed, cell.n, cell.ti, cell.pair * 4 + 2);
        const CommutatorEstimate est = commutator_norm(model, cell.n, a, b, t, {}, opts);
        const double env = commutator_growth_envelope(ma, nb, cell.n, t, model.sup_norm_v(),
                                                      a.op_norm, b.op_norm);
        out.commutator[ci] = {ma, nb, cell.n, t, est.value, env, env - est.value};
    }

    std::stable_sort(out.commutator.begin(), out.commutator.end(), [](const auto& a, const auto& b) {
        return std::tie(a.n_particles, a.t) < std::tie(b.n_particles, b.t);
    });

    if (cfg.output.csv) {
        auto csv = sink.open("commutator.csv");
        csv << "m,n,N,t,estimate,envelope,slack\n";
        for (const auto& r : out.commutator)
            csv << r.m << ',' << r.n_arity << ',' << r.n_particles << ',' << fmt17(r.t) << ','
                << fmt17(r.value) << ',' << fmt17(r.envelope) << ',' << fmt17(r.slack) << '\n';
    }
    if (cfg.output.json) {
        json rows = json::array();
        for (const auto& r : out.commutator)
            rows.push_back({{"m", r.m},
                            {"n", r.n_arity},
                            {"N", r.n_particles},
                            {"t", r.t},
                            {"estimate", r.value},
                            {"envelope", r.envelope},
                            {"slack", r.slack}});
        auto jf = sink.open("commutator.json");
        jf << rows.dump(1) << '\n';
    }
}

// ---- covariance ----------------------------------------------------------

void run_covariance(const RunConfig& cfg, const LatticeModel& model, RunOutcome& out,
                    const Sink& sink) {
    const auto& e = cfg.experiment;
    const int ma = e.arity_a, nb = e.arity_b;
    const Eigen::VectorXcd phi0 = initial_orbital(model.sites(), e.seeds[0]);

    for (int n : e.n_list) {
        auto basis = std::make_shared<OccupationBasis>(model.sites(), n);
        BosonHamiltonian h(model, n, basis);
        Propagator prop(h);
        SymmetricState state = product_state(phi0, n, basis);

        double t_prev = 0.0;
        for (std::size_t ti = 0; ti < e.t_grid.size(); ++ti) {
            const double t = e.t_grid[ti];
            if (t > t_prev) state.amplitudes = prop.evolve(state.amplitudes, t - t_prev);
            t_prev = t;

            const ReducedDensity joint = k_rdm(state, ma + nb);
            const ReducedDensity gm = k_rdm(state, ma);
            const ReducedDensity gn = k_rdm(state, nb);
            check_marginal(joint, "covariance");

            for (std::uint64_t seed : e.seeds)
                for (int p = 0; p < e.pairs; ++p) {
                    const Eigen::MatrixXcd a =
                        sample_observables(model.sites(), ma, 1, derive_seed(seed, n, ti, p * 4))
                            .front();
                    const Eigen::MatrixXcd b =
                        sample_observables(model.sites(), nb, 1,
                                           derive_seed(seed, n, ti, p * 4 + 1))
                            .front();
                    const double gap = covariance_gap_from_marginals(joint, gm, gn, a, b);
                    const double env = covariance_growth_envelope(ma, nb, n, t,
                                                                  model.sup_norm_v(), 1.0, 1.0);
                    out.covariance.push_back({ma, nb, n, t, gap, env, env - gap});
                }
        }
        check_propagator(prop, "covariance");
    }

    std::stable_sort(out.covariance.begin(), out.covariance.end(), [](const auto& a, const auto& b) {
        return std::tie(a.n_particles, a.t) < std::tie(b.n_particles, b.t);
    });

    if (cfg.output.csv) {
        auto csv = sink.open("covariance.csv");
        csv << "m,n,N,t,gap,envelope,slack\n";
        for (const auto& r : out.covariance)
            csv << r.m << ',' << r.n_arity << ',' << r.n_particles << ',' << fmt17(r.t) << ','
                << fmt17(r.value) << ',' << fmt17(r.envelope) << ',' << fmt17(r.slack) << '\n';
    }
    if (cfg.output.json) {
        json rows = json::array();
        for (const auto& r : out.covariance)
            rows.push_back({{"m", r.m},
                            {"n", r.n_arity},
                            {"N", r.n_particles},
                            {"t", r.t},
                            {"gap", r.value},
                            {"envelope", r.envelope},
                            {"slack", r.slack}});
        auto jf = sink.open("covariance.json");
        jf << rows.dump(1) << '\n';
    }
}

// ---- bbgky ---------------------------------------------------------------

void run_bbgky(const RunConfig& cfg, const LatticeModel& model, RunOutcome& out,
               const Sink& sink) {
    const auto& e = cfg.experiment;
    const Eigen::VectorXcd phi0 = initial_orbital(model.sites(), e.seeds[0]);
    const double t_max = e.t_grid.back();

    for (int n : e.n_list) {
        auto basis = std::make_shared<OccupationBasis>(model.sites(), n);
        BosonHamiltonian h(model, n, basis);
        Propagator prop(h);

        for (int k : e.k_list) {
            if (k + 1 > n) continue;
            for (const double dt : {e.dt, 0.5 * e.dt}) {
                const int steps = std::max(2, static_cast<int>(std::llround(t_max / dt)));
                SymmetricState state = product_state(phi0, n, basis);
                std::vector<MarginalSnapshot> traj;
                traj.reserve(steps + 1);
                for (int s = 0; s <= steps; ++s) {
                    if (s > 0) state.amplitudes = prop.evolve(state.amplitudes, dt);
                    MarginalSnapshot snap{s * dt, k_rdm(state, k), k_rdm(state, k + 1)};
                    check_marginal(snap.gamma_k, "bbgky");
                    traj.push_back(std::move(snap));
                }
                out.bbgky.push_back({k, n, dt, bbgky_residual(traj, model, n, k)});
            }
        }
        check_propagator(prop, "bbgky");
    }

    std::sort(out.bbgky.begin(), out.bbgky.end(), [](const auto& a, const auto& b) {
        return std::tie(a.k, a.n_particles, a.dt) < std::tie(b.k, b.n_particles, b.dt);
    });

    if (cfg.output.csv) {
        auto csv = sink.open("bbgky.csv");
        csv << "k,N,dt,residual\n";
        for (const auto& r : out.bbgky)
            csv << r.k << ',' << r.n_particles << ',' << fmt17(r.dt) << ',' << fmt17(r.residual)
                << '\n';
    }
    if (cfg.output.json) {
        json rows = json::array();
        for (const auto& r : out.bbgky)
            rows.push_back(
                {{"k", r.k}, {"N", r.n_particles}, {"dt", r.dt}, {"residual", r.residual}});
        auto jf = sink.open("bbgky.json");
        jf << rows.dump(1) << '\n';
    }
}

// ---- hartree-only --------------------------------------------------------

void run_hartree_only(const RunConfig& cfg, const LatticeModel& model, RunOutcome& out,
                      const Sink& sink) {
    const auto& e = cfg.experiment;
    HartreeOrbital cur{initial_orbital(model.sites(), e.seeds[0]), 0.0};

    json traj = json::array();
    double t_prev = 0.0;
    for (double t : e.t_grid) {
        if (t > t_prev) cur = hartree_solve(model, cur, t - t_prev, e.dt);
        t_prev = t;
        out.hartree.push_back({t, cur.norm(), hartree_energy(model, cur)});
        if (cfg.output.json) {
            json re = json::array(), im = json::array();
            for (int p = 0; p < model.sites(); ++p) {
                re.push_back(cur.phi[p].real());
                im.push_back(cur.phi[p].imag());
            }
            traj.push_back({{"time", t}, {"phi_real", re}, {"phi_imag", im}});
        }
    }

    if (cfg.output.csv) {
        auto csv = sink.open("hartree.csv");
        csv << "t,mass,energy\n";
        for (const auto& r : out.hartree)
            csv << fmt17(r.t) << ',' << fmt17(r.mass) << ',' << fmt17(r.energy) << '\n';
    }
    if (cfg.output.json) {
        auto jf = sink.open("hartree_trajectory.json");
        jf << traj.dump(1) << '\n';
    }
}

} // namespace

Eigen::VectorXcd initial_orbital(int d, std::uint64_t master_seed) {
    GaussianRng rng(derive_seed(master_seed, 0x0fb17a1));
    return rng.unit_vector(d);
}

RunOutcome run_experiments(const RunConfig& cfg, std::ostream& log) {
    const auto violations = validate(cfg);
    if (!violations.empty()) throw ConfigError(violations);

    const auto t0 = std::chrono::steady_clock::now();
    const LatticeModel model(cfg.model.d, cfg.model.period, PotentialShape::parse(cfg.model.u),
                             PotentialShape::parse(cfg.model.v));

    RunOutcome out;
    fs::create_directories(cfg.output.directory);
    Sink sink{fs::path(cfg.output.directory), &out.files_written};

    json extra;
    switch (cfg.experiment.kind) {
        case ExperimentKind::Convergence: run_convergence(cfg, model, out, sink, extra); break;
        case ExperimentKind::Commutator: run_commutator(cfg, model, out, sink); break;
        case ExperimentKind::Covariance: run_covariance(cfg, model, out, sink); break;
        case ExperimentKind::Bbgky: run_bbgky(cfg, model, out, sink); break;
        case ExperimentKind::HartreeOnly: run_hartree_only(cfg, model, out, sink); break;
    }

    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json manifest{
        {"tool", "mflab"},
        {"version", MFLAB_VERSION},
        {"config_digest", cfg.digest()},
        {"kind", to_string(cfg.experiment.kind)},
        {"model",
         {{"d", cfg.model.d},
          {"period", cfg.model.period},
          {"u", PotentialShape::parse(cfg.model.u).canonical()},
          {"v", PotentialShape::parse(cfg.model.v).canonical()},
          {"digest", model.digest()},
          {"sup_norm_v", model.sup_norm_v()},
          {"fourier_l1_v", model.fourier_l1_v()},
          {"lambda_v", model.lambda_v() ? json(*model.lambda_v()) : json(nullptr)}}},
        {"seeds", cfg.experiment.seeds},
        {"wall_seconds", out.wall_seconds},
        {"rdm_psd_clip", rdm_psd_clip_magnitude()},
        {"extra", extra},
    };
    {
        json files = json::array();
        for (const auto& f : out.files_written) files.push_back(f);
        manifest["files"] = files;
        auto mf = sink.open("manifest.json");
        mf << manifest.dump(1) << '\n';
    }

    log << "wrote " << out.files_written.size() << " files to " << cfg.output.directory << " in "
        << fmt17(out.wall_seconds) << "s\n";
    return out;
}

} // namespace mflab
