#include "mflab/rdm.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mflab/errors.hpp"
#include "mflab/linalg.hpp"

namespace mflab {

namespace {

std::atomic<double> g_clip_magnitude{0.0};

std::int64_t pow_checked(int base, int exp, std::int64_t budget, const char* what) {
    std::int64_t v = 1;
    for (int i = 0; i < exp; ++i) {
        if (__builtin_mul_overflow(v, static_cast<std::int64_t>(base), &v) || v > budget)
            throw BudgetError(std::string(what) + ": dimension exceeds budget of " +
                              std::to_string(budget));
    }
    return v;
}

double falling_factorial(int n, int k) {
    double f = 1.0;
    for (int i = 0; i < k; ++i) f *= static_cast<double>(n - i);
    return f;
}

// flat multi-index (particle 1 most significant) -> multiset rank in the
// k-particle occupation basis
std::vector<std::int64_t> flat_to_multiset_map(int d, int k, const OccupationBasis& tuples,
                                               std::int64_t dk) {
    std::vector<std::int64_t> map(dk);
    std::vector<int> occ(d);
    for (std::int64_t flat = 0; flat < dk; ++flat) {
        std::fill(occ.begin(), occ.end(), 0);
        std::int64_t rest = flat;
        for (int j = 0; j < k; ++j) {
            occ[static_cast<int>(rest % d)] += 1;
            rest /= d;
        }
        map[flat] = tuples.rank(occ);
    }
    return map;
}

// columns: a_{p1}...a_{pk} psi for every sorted tuple (multiset) of sites
Eigen::MatrixXcd annihilated_columns(const SymmetricState& state, int k,
                                     const OccupationBasis& tuples, const OccupationBasis& small,
                                     bool parallel) {
    const int d = state.sites();
    const std::int64_t cols = tuples.size();
    const std::int64_t rows = small.size();
    Eigen::MatrixXcd psi_cols(rows, cols);

#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t c = 0; c < cols; ++c) {
        const auto mu = tuples.occupation(c);
        std::vector<int> source(d);
        for (std::int64_t m = 0; m < rows; ++m) {
            const auto target = small.occupation(m);
            double w = 1.0;
            for (int p = 0; p < d; ++p) {
                source[p] = target[p] + mu[p];
                // sqrt of (target_p + mu_p)(target_p + mu_p - 1)...(target_p + 1)
                for (int e = 1; e <= mu[p]; ++e) w *= static_cast<double>(target[p] + e);
            }
            psi_cols(m, c) = std::sqrt(w) * state.amplitudes[state.basis->rank(source)];
        }
    }
    return psi_cols;
}

ReducedDensity k_rdm_impl(const SymmetricState& state, int k, bool parallel) {
    const int d = state.sites();
    const int n = state.particles();
    if (k < 1) throw std::invalid_argument("k_rdm: k must be at least 1");
    if (k > n) throw std::invalid_argument("k_rdm: k exceeds the particle number");
    const std::int64_t dk = pow_checked(d, k, kMarginalDimBudget, "k_rdm");

    const OccupationBasis tuples(d, k);
    const OccupationBasis small(d, n - k);
    const Eigen::MatrixXcd cols = annihilated_columns(state, k, tuples, small, parallel);

    // Gram matrix over sorted tuples, then expansion to all multi-indices:
    // entries depend on tuples only through their multisets
    Eigen::MatrixXcd gram = cols.adjoint() * cols;
    gram = ((gram + gram.adjoint()) * 0.5).eval();
    gram /= falling_factorial(n, k);

    const std::vector<std::int64_t> ms = flat_to_multiset_map(d, k, tuples, dk);
    ReducedDensity rho{k, d, Eigen::MatrixXcd(dk, dk)};
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t p = 0; p < dk; ++p)
        for (std::int64_t q = 0; q < dk; ++q) rho.matrix(p, q) = gram(ms[p], ms[q]);
    return rho;
}

} // namespace

ReducedDensity k_rdm(const SymmetricState& state, int k) { return k_rdm_impl(state, k, true); }

ReducedDensity k_rdm_serial(const SymmetricState& state, int k) {
    return k_rdm_impl(state, k, false);
}

ReducedDensity one_rdm(const SymmetricState& state) { return k_rdm(state, 1); }

double trace_distance(const ReducedDensity& a, const ReducedDensity& b) {
    if (a.k != b.k || a.d != b.d)
        throw std::invalid_argument("trace_distance: marginals have different shapes");
    return herm_abs_eigen_sum(a.matrix - b.matrix);
}

ReducedDensity dense_oracle_rdm(const SymmetricState& state, int k, std::int64_t budget) {
    const int d = state.sites();
    const int n = state.particles();
    if (k < 1 || k > n) throw std::invalid_argument("dense_oracle_rdm: k out of range");
    pow_checked(d, n, budget, "dense_oracle_rdm");

    const Eigen::VectorXcd full = to_full_vector(state, budget);
    std::int64_t dk = 1;
    for (int i = 0; i < k; ++i) dk *= d;
    const std::int64_t rest = full.size() / dk;

    // gamma[a,b] = sum_r Psi[a,rest=r] conj(Psi[b,rest=r]); first k particles
    // are the high digits, so the traced indices are contiguous
    ReducedDensity rho{k, d, Eigen::MatrixXcd::Zero(dk, dk)};
    for (std::int64_t a = 0; a < dk; ++a)
        for (std::int64_t b = 0; b < dk; ++b) {
            std::complex<double> acc(0.0, 0.0);
            for (std::int64_t r = 0; r < rest; ++r)
                acc += full[a * rest + r] * std::conj(full[b * rest + r]);
            rho.matrix(a, b) = acc;
        }
    return rho;
}

ReducedDensity pure_power(const Eigen::VectorXcd& phi, int k) {
    const int d = static_cast<int>(phi.size());
    const std::int64_t dk = pow_checked(d, k, kMarginalDimBudget, "pure_power");
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(1);
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXcd next(v.size() * d);
        for (Eigen::Index a = 0; a < v.size(); ++a)
            for (int p = 0; p < d; ++p) next[a * d + p] = v[a] * phi[p];
        v = std::move(next);
    }
    ReducedDensity rho{k, d, Eigen::MatrixXcd(dk, dk)};
    rho.matrix = v * v.adjoint();
    return rho;
}

ReducedDensity partial_trace_last(const ReducedDensity& rho) {
    if (rho.k < 2) throw std::invalid_argument("partial_trace_last: need at least two particles");
    const std::int64_t dk1 = rho.matrix.rows() / rho.d;
    ReducedDensity out{rho.k - 1, rho.d, Eigen::MatrixXcd::Zero(dk1, dk1)};
    for (std::int64_t a = 0; a < dk1; ++a)
        for (std::int64_t b = 0; b < dk1; ++b) {
            std::complex<double> acc(0.0, 0.0);
            for (int c = 0; c < rho.d; ++c) acc += rho.matrix(a * rho.d + c, b * rho.d + c);
            out.matrix(a, b) = acc;
        }
    return out;
}

ReducedDensity clipped_psd(const ReducedDensity& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double most_negative = ev.minCoeff();
    if (most_negative < -1e-10)
        throw InvariantViolation("marginal has eigenvalue " + std::to_string(most_negative) +
                                 " below the -1e-10 noise floor");
    if (most_negative >= 0.0) return rho;

    double prev = g_clip_magnitude.load();
    while (-most_negative > prev && !g_clip_magnitude.compare_exchange_weak(prev, -most_negative)) {
    }

    Eigen::VectorXd clipped = ev.cwiseMax(0.0);
    clipped /= clipped.sum();
    ReducedDensity out{rho.k, rho.d, Eigen::MatrixXcd()};
    out.matrix = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
    return out;
}

double rdm_psd_clip_magnitude() { return g_clip_magnitude.load(); }

} // namespace mflab
