#include "mflab/distinguishable.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mflab/errors.hpp"
#include "mflab/linalg.hpp"
#include "mflab/rdm.hpp"
#include "mflab/rng.hpp"

namespace mflab {

using std::complex;

namespace {

std::int64_t pow64(int base, int exp) {
    std::int64_t v = 1;
    for (int i = 0; i < exp; ++i) {
        if (__builtin_mul_overflow(v, static_cast<std::int64_t>(base), &v))
            throw BudgetError("tensor-space dimension overflows 64 bits");
    }
    return v;
}

} // namespace

void SlotObservable::validate(int d, int n_particles) const {
    if (arity < 1) throw std::invalid_argument("slot observable: arity must be positive");
    const std::int64_t dm = pow64(d, arity);
    if (matrix.rows() != dm || matrix.cols() != dm)
        throw std::invalid_argument("slot observable: matrix is not d^arity square");
    if (static_cast<int>(slots.size()) != arity)
        throw std::invalid_argument("slot observable: slot count != arity");
    for (int i = 0; i < arity; ++i) {
        if (slots[i] < 0 || slots[i] >= n_particles)
            throw std::invalid_argument("slot observable: slot index out of range");
        if (i > 0 && slots[i] <= slots[i - 1])
            throw std::invalid_argument("slot observable: slots must be strictly increasing");
    }
    if (std::abs(op_norm - spectral_norm(matrix)) > 1e-10 * std::max(1.0, op_norm))
        throw std::invalid_argument("slot observable: stored op_norm disagrees with the matrix");
}

FullSpaceHamiltonian::FullSpaceHamiltonian(const LatticeModel& model, int n_particles)
    : model_(&model), d_(model.sites()), n_(n_particles) {
    if (n_ < 1) throw std::invalid_argument("full-space Hamiltonian: need at least one particle");
    dim_ = pow64(d_, n_);
    if (dim_ > kFullMatrixFreeBudget)
        throw BudgetError("full-space dimension " + std::to_string(dim_) +
                          " exceeds the matrix-free budget " + std::to_string(kFullMatrixFreeBudget));

    // (1/N) sum_{i<j} V(x_i-x_j) = (1/2N) [ sum_{pq} V(p-q) n_p n_q - N V(0) ]
    const auto& v = model.interaction();
    diagonal_.resize(dim_);
#pragma omp parallel for schedule(static)
    for (std::int64_t idx = 0; idx < dim_; ++idx) {
        std::vector<int> occ(d_, 0);
        std::int64_t rest = idx;
        for (int j = 0; j < n_; ++j) {
            occ[static_cast<int>(rest % d_)] += 1;
            rest /= d_;
        }
        double pair_sum = 0.0;
        for (int p = 0; p < d_; ++p) {
            if (occ[p] == 0) continue;
            for (int q = 0; q < d_; ++q) {
                if (occ[q] == 0) continue;
                pair_sum += v[(p - q + d_) % d_] * occ[p] * occ[q];
            }
        }
        diagonal_[idx] = (pair_sum - n_ * v[0]) * 0.5 / n_;
    }
}

void FullSpaceHamiltonian::apply_impl(const Eigen::VectorXcd& x, Eigen::VectorXcd& y,
                                      bool parallel) const {
    const auto& kin = model_->kinetic();

#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t i = 0; i < dim_; ++i) y[i] = diagonal_[i] * x[i];

    // one-body sweep along each particle axis
    for (int axis = 0; axis < n_; ++axis) {
        const std::int64_t stride = pow64(d_, n_ - 1 - axis);
        const std::int64_t outer = dim_ / (stride * d_);
        const std::int64_t cells = outer * stride;
#pragma omp parallel for schedule(static) if (parallel)
        for (std::int64_t cell = 0; cell < cells; ++cell) {
            const std::int64_t hi = cell / stride;
            const std::int64_t lo = cell % stride;
            const std::int64_t base = hi * stride * d_ + lo;
            for (int p = 0; p < d_; ++p) {
                complex<double> acc(0.0, 0.0);
                for (int q = 0; q < d_; ++q) {
                    const double w = kin(p, q);
                    if (w != 0.0) acc += w * x[base + q * stride];
                }
                y[base + p * stride] += acc;
            }
        }
    }
}

void FullSpaceHamiltonian::apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
    if (x.size() != dim_) throw std::invalid_argument("full-space apply: dimension mismatch");
    y.resize(dim_);
    apply_impl(x, y, true);
}

void FullSpaceHamiltonian::apply_serial(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
    if (x.size() != dim_) throw std::invalid_argument("full-space apply: dimension mismatch");
    y.resize(dim_);
    apply_impl(x, y, false);
}

Eigen::MatrixXd FullSpaceHamiltonian::dense_real() const {
    if (dim_ > 8192) throw BudgetError("dense full-space Hamiltonian beyond 8192 dimensions refused");
    Eigen::MatrixXd m = diagonal_.asDiagonal();
    const auto& kin = model_->kinetic();
    for (int axis = 0; axis < n_; ++axis) {
        const std::int64_t stride = pow64(d_, n_ - 1 - axis);
        const std::int64_t outer = dim_ / (stride * d_);
        for (std::int64_t hi = 0; hi < outer; ++hi)
            for (std::int64_t lo = 0; lo < stride; ++lo) {
                const std::int64_t base = hi * stride * d_ + lo;
                for (int p = 0; p < d_; ++p)
                    for (int q = 0; q < d_; ++q)
                        m(base + p * stride, base + q * stride) += kin(p, q);
            }
    }
    return m;
}

FullState full_evolve(const LatticeModel& model, int n_particles, const FullState& state,
                      double t, const PropagatorConfig& cfg) {
    if (state.d != model.sites() || state.n != n_particles)
        throw std::invalid_argument("full_evolve: state does not match model/particle number");
    FullSpaceHamiltonian h(model, n_particles);
    if (state.amplitudes.size() != h.dim())
        throw std::invalid_argument("full_evolve: amplitude length mismatch");
    Propagator prop(h, cfg);
    return {state.d, state.n, prop.evolve(state.amplitudes, t)};
}

void apply_slot_observable(const SlotObservable& a, int d, int n_particles,
                           const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    a.validate(d, n_particles);
    const std::int64_t dim = pow64(d, n_particles);
    if (x.size() != dim) throw std::invalid_argument("apply_slot_observable: dimension mismatch");
    y.resize(dim);

    const int m = a.arity;
    const std::int64_t dm = pow64(d, m);

    // offsets of the slot digits within a flat index
    std::vector<std::int64_t> slot_stride(m);
    for (int i = 0; i < m; ++i) slot_stride[i] = pow64(d, n_particles - 1 - a.slots[i]);
    std::vector<std::int64_t> slot_off(dm);
    for (std::int64_t s = 0; s < dm; ++s) {
        std::int64_t off = 0, rest = s;
        for (int i = m - 1; i >= 0; --i) {  // least significant digit = last slot
            off += (rest % d) * slot_stride[i];
            rest /= d;
        }
        slot_off[s] = off;
    }

    // strides of the remaining axes
    std::vector<std::int64_t> rest_stride;
    for (int axis = 0; axis < n_particles; ++axis) {
        if (std::find(a.slots.begin(), a.slots.end(), axis) == a.slots.end())
            rest_stride.push_back(pow64(d, n_particles - 1 - axis));
    }
    const std::int64_t rest_count = dim / dm;

#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < rest_count; ++r) {
        std::int64_t base = 0, rr = r;
        for (int i = static_cast<int>(rest_stride.size()) - 1; i >= 0; --i) {
            base += (rr % d) * rest_stride[i];
            rr /= d;
        }
        Eigen::VectorXcd gathered(dm);
        for (std::int64_t s = 0; s < dm; ++s) gathered[s] = x[base + slot_off[s]];
        const Eigen::VectorXcd transformed = a.matrix * gathered;
        for (std::int64_t s = 0; s < dm; ++s) y[base + slot_off[s]] = transformed[s];
    }
}

namespace {

struct HeisenbergObservable {
    // w -> e^{iHt} M e^{-iHt} w
    const Propagator* prop;
    const SlotObservable* obs;
    Eigen::MatrixXcd adjoint_matrix;
    int d, n;
    double t;

    Eigen::VectorXcd apply(const Eigen::VectorXcd& w, bool use_adjoint) const {
        Eigen::VectorXcd tmp = prop->evolve(w, t);
        Eigen::VectorXcd out(w.size());
        if (use_adjoint) {
            SlotObservable adj{obs->arity, adjoint_matrix, obs->op_norm, obs->slots};
            apply_slot_observable(adj, d, n, tmp, out);
        } else {
            apply_slot_observable(*obs, d, n, tmp, out);
        }
        return prop->evolve(out, -t);
    }
};

} // namespace

CommutatorEstimate commutator_norm(const LatticeModel& model, int n_particles,
                                   const SlotObservable& a, const SlotObservable& b, double t,
                                   const PropagatorConfig& cfg, const CommutatorOptions& opts) {
    const int d = model.sites();
    a.validate(d, n_particles);
    b.validate(d, n_particles);
    for (int s : a.slots)
        if (std::find(b.slots.begin(), b.slots.end(), s) != b.slots.end())
            throw std::invalid_argument("commutator_norm: slot sets must be disjoint");

    FullSpaceHamiltonian h(model, n_particles);
    Propagator prop(h, cfg);
    const std::int64_t dim = h.dim();

    const Eigen::MatrixXcd a_adj = a.matrix.adjoint();
    HeisenbergObservable bt{&prop, &b, b.matrix.adjoint(), d, n_particles, t};

    const auto apply_a = [&](const Eigen::VectorXcd& x, bool adjoint) {
        Eigen::VectorXcd out(dim);
        if (adjoint) {
            SlotObservable adj{a.arity, a_adj, a.op_norm, a.slots};
            apply_slot_observable(adj, d, n_particles, x, out);
        } else {
            apply_slot_observable(a, d, n_particles, x, out);
        }
        return out;
    };

    // C v = A (B_t v) - B_t (A v);   C+ v = B_t+(A+ v) ... reordered below
    const auto apply_c = [&](const Eigen::VectorXcd& v) {
        return (apply_a(bt.apply(v, false), false) - bt.apply(apply_a(v, false), false)).eval();
    };
    const auto apply_c_dag = [&](const Eigen::VectorXcd& v) {
        return (bt.apply(apply_a(v, true), true) - apply_a(bt.apply(v, true), true)).eval();
    };

    CommutatorEstimate best;
    for (int restart = 0; restart < opts.restarts; ++restart) {
        GaussianRng rng(derive_seed(opts.seed, 0x9e55, restart));
        Eigen::VectorXcd v = rng.unit_vector(dim);
        double lambda_prev = 0.0;
        CommutatorEstimate est;
        for (int it = 0; it < opts.max_iterations; ++it) {
            const Eigen::VectorXcd cv = apply_c(v);
            const double lambda = cv.squaredNorm();  // Rayleigh quotient of C+C at unit v
            est.iterations = it + 1;
            if (lambda > est.value * est.value) est.value = std::sqrt(lambda);
            if (lambda < 1e-28) {
                est.converged = true;
                est.residual = 0.0;
                break;
            }
            const Eigen::VectorXcd gv = apply_c_dag(cv);
            est.residual = (gv - lambda * v).norm() / lambda;
            if (it > 0 && std::abs(lambda - lambda_prev) <= opts.rel_tol * lambda) {
                est.converged = true;
                break;
            }
            lambda_prev = lambda;
            const double gn = gv.norm();
            if (gn == 0.0) {
                est.converged = true;
                break;
            }
            v = gv / gn;
        }
        if (restart == 0 || est.value > best.value) best = est;
    }
    return best;
}

double covariance_gap(const SymmetricState& state, const Eigen::MatrixXcd& a,
                      const Eigen::MatrixXcd& b) {
    const int d = state.sites();
    const auto arity_of = [d](const Eigen::MatrixXcd& m, const char* name) {
        if (m.rows() != m.cols()) throw std::invalid_argument("covariance_gap: matrix not square");
        int arity = 0;
        std::int64_t dm = 1;
        while (dm < m.rows()) {
            dm *= d;
            ++arity;
        }
        if (dm != m.rows())
            throw std::invalid_argument(std::string("covariance_gap: ") + name +
                                        " is not d^m square");
        return std::max(arity, 1);
    };
    const int m = arity_of(a, "A");
    const int n = arity_of(b, "B");
    if (m + n > state.particles())
        throw std::invalid_argument("covariance_gap: m + n exceeds the particle number");

    return covariance_gap_from_marginals(k_rdm(state, m + n), k_rdm(state, m), k_rdm(state, n),
                                         a, b);
}

double covariance_gap_from_marginals(const ReducedDensity& joint, const ReducedDensity& gamma_m,
                                     const ReducedDensity& gamma_n, const Eigen::MatrixXcd& a,
                                     const Eigen::MatrixXcd& b) {
    if (a.rows() != gamma_m.matrix.rows() || b.rows() != gamma_n.matrix.rows() ||
        a.rows() * b.rows() != joint.matrix.rows())
        throw std::invalid_argument("covariance_gap: observable/marginal shape mismatch");
    const complex<double> both = (kron(a, b) * joint.matrix).trace();
    const complex<double> split =
        (a * gamma_m.matrix).trace() * (b * gamma_n.matrix).trace();
    return std::abs(both - split);
}

std::vector<Eigen::MatrixXcd> sample_observables(int d, int m, int count, std::uint64_t seed) {
    const std::int64_t dm = pow64(d, m);
    if (dm > kMarginalDimBudget) throw BudgetError("sample_observables: d^m exceeds budget");
    std::vector<Eigen::MatrixXcd> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        GaussianRng rng(derive_seed(seed, 0xab5e, i));
        Eigen::MatrixXcd g(dm, dm);
        for (std::int64_t r = 0; r < dm; ++r)
            for (std::int64_t c = 0; c < dm; ++c) g(r, c) = rng.complex_normal();
        Eigen::MatrixXcd h = 0.5 * (g + g.adjoint());
        h /= spectral_norm(h);
        out.push_back(std::move(h));
    }
    return out;
}

} // namespace mflab
