#include "mflab/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "mflab/errors.hpp"
#include "mflab/linalg.hpp"

namespace mflab {

double trace_distance_envelope(int k, int n_particles, double t, double sup_norm_v,
                               double lambda_v) {
    if (!(lambda_v >= 1.0))
        throw std::invalid_argument("trace_distance_envelope: lambda_V undefined (V = 0?)");
    if (t < 0.0) throw std::invalid_argument("trace_distance_envelope: t must be nonnegative");
    const double prefactor = static_cast<double>(k) * k * lambda_v / n_particles;
    return prefactor * std::exp(2.0 * k * sup_norm_v) * std::expm1(8.0 * sup_norm_v * t);
}

double commutator_growth_envelope(int m, int n, int n_particles, double t, double sup_norm_v,
                                  double norm_a, double norm_b) {
    const double prefactor =
        static_cast<double>(m) * n * norm_a * norm_b / n_particles;
    return prefactor * std::expm1(4.0 * sup_norm_v * std::abs(t));
}

double covariance_growth_envelope(int m, int n, int n_particles, double t, double sup_norm_v,
                                  double norm_a, double norm_b) {
    const double prefactor =
        static_cast<double>(m) * n * norm_a * norm_b / n_particles;
    return prefactor * std::expm1(8.0 * sup_norm_v * t);
}

namespace {

// sum_j h_j on (C^d)^{tensor k}
Eigen::MatrixXcd one_body_sum(const LatticeModel& model, int k, std::int64_t dk) {
    const int d = model.sites();
    const Eigen::MatrixXcd& h = model.kinetic_complex();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dk, dk);
    for (int axis = 0; axis < k; ++axis) {
        std::int64_t stride = 1;
        for (int a = axis + 1; a < k; ++a) stride *= d;
        const std::int64_t outer = dk / (stride * d);
        for (std::int64_t hi = 0; hi < outer; ++hi)
            for (std::int64_t lo = 0; lo < stride; ++lo) {
                const std::int64_t base = hi * stride * d + lo;
                for (int p = 0; p < d; ++p)
                    for (int q = 0; q < d; ++q) out(base + p * stride, base + q * stride) += h(p, q);
            }
    }
    return out;
}

// diagonal of V(x_i - x_j) on (C^d)^{tensor k}, axes i < j (0-based)
Eigen::VectorXd pair_potential_diag(const LatticeModel& model, int k, int i, int j,
                                    std::int64_t dk) {
    const int d = model.sites();
    const auto& v = model.interaction();
    Eigen::VectorXd diag(dk);
    for (std::int64_t idx = 0; idx < dk; ++idx) {
        std::int64_t rest = idx;
        int digit[64];
        for (int a = k - 1; a >= 0; --a) {
            digit[a] = static_cast<int>(rest % d);
            rest /= d;
        }
        diag[idx] = v[(digit[i] - digit[j] + d) % d];
    }
    return diag;
}

Eigen::MatrixXcd commutator_with_diag(const Eigen::VectorXd& diag, const Eigen::MatrixXcd& g) {
    // [D, g] with D diagonal: (D g - g D)_{ab} = (diag_a - diag_b) g_{ab}
    Eigen::MatrixXcd out(g.rows(), g.cols());
    for (Eigen::Index a = 0; a < g.rows(); ++a)
        for (Eigen::Index b = 0; b < g.cols(); ++b) out(a, b) = (diag[a] - diag[b]) * g(a, b);
    return out;
}

Eigen::MatrixXcd traced_interaction_term(const ReducedDensity& gamma_k1,
                                         const LatticeModel& model, int k) {
    // sum_{j<=k} Tr_{k+1} [V(x_j - x_{k+1}), gamma^(k+1)]
    const std::int64_t dk1 = gamma_k1.matrix.rows();
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dk1 / model.sites(), dk1 / model.sites());
    for (int j = 0; j < k; ++j) {
        const Eigen::VectorXd diag = pair_potential_diag(model, k + 1, j, k, dk1);
        ReducedDensity comm{k + 1, model.sites(), commutator_with_diag(diag, gamma_k1.matrix)};
        sum += partial_trace_last(comm).matrix;
    }
    return sum;
}

double hierarchy_residual_impl(const std::vector<MarginalSnapshot>& traj,
                               const LatticeModel& model, int n_particles, int k,
                               bool finite_n) {
    if (traj.size() < 3)
        throw std::invalid_argument("hierarchy residual needs at least 3 snapshots");
    const double dt = traj[1].time - traj[0].time;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        if (std::abs(traj[i].time - traj[i - 1].time - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw std::invalid_argument("hierarchy residual: snapshots not uniformly spaced");
    }

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
        const Eigen::MatrixXcd dgamma =
            std::complex<double>(0.0, 1.0) / (2.0 * dt) *
            (traj[i + 1].gamma_k.matrix - traj[i - 1].gamma_k.matrix);
        const Eigen::MatrixXcd rhs =
            finite_n ? bbgky_rhs(traj[i].gamma_k, traj[i].gamma_k1, model, n_particles)
                     : infinite_hierarchy_rhs(traj[i].gamma_k, traj[i].gamma_k1, model);
        worst = std::max(worst, trace_norm(dgamma - rhs));
    }
    return worst;
}

} // namespace

Eigen::MatrixXcd bbgky_rhs(const ReducedDensity& gamma_k, const ReducedDensity& gamma_k1,
                           const LatticeModel& model, int n_particles) {
    const int k = gamma_k.k;
    if (gamma_k1.k != k + 1)
        throw std::invalid_argument("bbgky_rhs: need the (k+1)-particle marginal");
    if (k >= n_particles) throw std::invalid_argument("bbgky_rhs: requires k < N");
    const std::int64_t dk = gamma_k.matrix.rows();

    const Eigen::MatrixXcd h_sum = one_body_sum(model, k, dk);
    Eigen::MatrixXcd rhs = h_sum * gamma_k.matrix - gamma_k.matrix * h_sum;

    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            const Eigen::VectorXd diag = pair_potential_diag(model, k, i, j, dk);
            rhs += commutator_with_diag(diag, gamma_k.matrix) / n_particles;
        }

    rhs += (static_cast<double>(n_particles - k) / n_particles) *
           traced_interaction_term(gamma_k1, model, k);
    return rhs;
}

Eigen::MatrixXcd infinite_hierarchy_rhs(const ReducedDensity& gamma_k,
                                        const ReducedDensity& gamma_k1,
                                        const LatticeModel& model) {
    const int k = gamma_k.k;
    if (gamma_k1.k != k + 1)
        throw std::invalid_argument("infinite_hierarchy_rhs: need the (k+1)-particle marginal");
    const std::int64_t dk = gamma_k.matrix.rows();

    const Eigen::MatrixXcd h_sum = one_body_sum(model, k, dk);
    Eigen::MatrixXcd rhs = h_sum * gamma_k.matrix - gamma_k.matrix * h_sum;
    rhs += traced_interaction_term(gamma_k1, model, k);
    return rhs;
}

double bbgky_residual(const std::vector<MarginalSnapshot>& trajectory, const LatticeModel& model,
                      int n_particles, int k) {
    if (k >= n_particles) throw std::invalid_argument("bbgky_residual: requires k < N");
    return hierarchy_residual_impl(trajectory, model, n_particles, k, true);
}

double infinite_hierarchy_residual(const std::vector<HartreeOrbital>& trajectory,
                                   const LatticeModel& model, int k) {
    std::vector<MarginalSnapshot> snaps;
    snaps.reserve(trajectory.size());
    for (const auto& orb : trajectory)
        snaps.push_back({orb.time, pure_power(orb.phi, k), pure_power(orb.phi, k + 1)});
    return hierarchy_residual_impl(snaps, model, 0, k, false);
}

RateFit fit_rate(std::span<const std::pair<double, double>> n_distance) {
    RateFit fit;
    std::vector<std::pair<double, double>> logs;
    for (const auto& [n, dist] : n_distance) {
        if (dist <= kRateFitFloor || n <= 0.0) {
            fit.excluded_points += 1;
            continue;
        }
        logs.push_back({std::log(n), std::log(dist)});
    }
    fit.used_points = static_cast<int>(logs.size());
    if (fit.used_points < 3)
        throw std::invalid_argument("fit_rate: need at least 3 usable points above the noise floor");

    double sx = 0, sy = 0;
    for (const auto& [x, y] : logs) {
        sx += x;
        sy += y;
    }
    const double mx = sx / fit.used_points, my = sy / fit.used_points;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : logs) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: all N values identical");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double ss_res = syy - sxy * sxy / sxx;
    fit.r_squared = (syy == 0.0) ? 1.0 : 1.0 - ss_res / syy;
    return fit;
}

} // namespace mflab
