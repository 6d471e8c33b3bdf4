#include "mflab/fock.hpp"

#include <cmath>
#include <stdexcept>

#include "mflab/errors.hpp"

namespace mflab {

std::int64_t checked_binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t c = 1;
    for (int i = 1; i <= k; ++i) {
        // c = c*(n-k+i)/i, exact at every step
        const std::int64_t num = n - k + i;
        std::int64_t t;
        if (__builtin_mul_overflow(c, num, &t))
            throw std::overflow_error("binomial(" + std::to_string(n) + "," + std::to_string(k) +
                                      ") exceeds 64-bit range");
        c = t / i;
    }
    return c;
}

std::int64_t OccupationBasis::dimension(int sites, int particles) {
    if (sites < 1) throw std::invalid_argument("basis needs at least one site");
    if (particles < 0) throw std::invalid_argument("particle number must be nonnegative");
    return checked_binomial(sites + particles - 1, particles);
}

OccupationBasis::OccupationBasis(int sites, int particles) : d_(sites), n_(particles) {
    size_ = dimension(sites, particles);

    // Pascal table with saturation; entries actually consulted by rank/unrank
    // count basis subsets and therefore fit whenever size_ fits.
    binomial_stride_ = d_ + n_ + 1;
    binomial_.assign(static_cast<std::size_t>(binomial_stride_) * binomial_stride_, 0);
    for (int i = 0; i < binomial_stride_; ++i) {
        binomial_[i * binomial_stride_] = 1;
        for (int j = 1; j <= i; ++j) {
            const std::int64_t a = binomial_[(i - 1) * binomial_stride_ + j - 1];
            const std::int64_t b = (j <= i - 1) ? binomial_[(i - 1) * binomial_stride_ + j] : 0;
            std::int64_t s;
            if (a < 0 || b < 0 || __builtin_add_overflow(a, b, &s)) s = -1;
            binomial_[i * binomial_stride_ + j] = s;
        }
    }

    // enumerate in reverse-lexicographic order: (N,0,...,0) first
    occupations_.resize(static_cast<std::size_t>(size_) * d_);
    std::vector<int> occ(d_, 0);
    occ[0] = n_;
    for (std::int64_t i = 0;; ++i) {
        std::copy(occ.begin(), occ.end(), occupations_.begin() + i * d_);
        // successor: find rightmost site p < d-1 with occ[p] > 0, move one
        // particle to p+1 and flush everything right of p+1 back onto p+1
        int p = d_ - 2;
        while (p >= 0 && occ[p] == 0) --p;
        if (p < 0) break;
        const int tail = occ[d_ - 1];
        occ[p] -= 1;
        occ[d_ - 1] = 0;
        occ[p + 1] += 1 + tail;
    }
}

std::int64_t OccupationBasis::count_greater(int value, int remaining, int slots_after) const {
    // number of suffix completions whose next entry exceeds `value`
    const int top = remaining - value - 1 + slots_after;
    if (top < slots_after || value >= remaining) return 0;
    const std::int64_t c = binomial_[top * binomial_stride_ + slots_after];
    if (c < 0) throw std::overflow_error("occupation rank overflow");
    return c;
}

std::int64_t OccupationBasis::rank(std::span<const int> occ) const {
    std::int64_t r = 0;
    int remaining = n_;
    for (int p = 0; p < d_ - 1; ++p) {
        r += count_greater(occ[p], remaining, d_ - 1 - p);
        remaining -= occ[p];
    }
    return r;
}

SymmetricState product_state(const Eigen::VectorXcd& phi, int n,
                             std::shared_ptr<const OccupationBasis> basis) {
    if (!basis) throw std::invalid_argument("product_state: null basis");
    if (phi.size() != basis->sites())
        throw std::invalid_argument("product_state: orbital length does not match basis sites");
    if (basis->particles() != n)
        throw std::invalid_argument("product_state: basis built for a different particle number");
    if (std::abs(phi.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("product_state: orbital is not normalized");

    const std::int64_t size = basis->size();
    const int d = basis->sites();
    const double log_nfact = std::lgamma(static_cast<double>(n) + 1.0);

    SymmetricState state{basis, Eigen::VectorXcd(size)};
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < size; ++i) {
        const auto occ = basis->occupation(i);
        double log_coeff = log_nfact;
        std::complex<double> mono(1.0, 0.0);
        for (int p = 0; p < d; ++p) {
            if (occ[p] == 0) continue;
            log_coeff -= std::lgamma(static_cast<double>(occ[p]) + 1.0);
            std::complex<double> pw = phi[p];
            for (int e = 1; e < occ[p]; ++e) pw *= phi[p];
            mono *= pw;
        }
        state.amplitudes[i] = std::exp(0.5 * log_coeff) * mono;
    }
    state.amplitudes.normalize();
    return state;
}

Eigen::VectorXcd to_full_vector(const SymmetricState& state, std::int64_t budget) {
    const int d = state.sites();
    const int n = state.particles();
    std::int64_t full = 1;
    for (int j = 0; j < n; ++j) {
        if (__builtin_mul_overflow(full, static_cast<std::int64_t>(d), &full) || full > budget)
            throw BudgetError("to_full_vector: d^N exceeds budget of " + std::to_string(budget));
    }
    const double log_nfact = std::lgamma(static_cast<double>(n) + 1.0);

    Eigen::VectorXcd out(full);
    std::vector<int> occ(d);
#pragma omp parallel for schedule(static) firstprivate(occ)
    for (std::int64_t idx = 0; idx < full; ++idx) {
        std::fill(occ.begin(), occ.end(), 0);
        std::int64_t rest = idx;
        for (int j = 0; j < n; ++j) {
            occ[static_cast<int>(rest % d)] += 1;
            rest /= d;
        }
        double log_w = -log_nfact;
        for (int p = 0; p < d; ++p)
            if (occ[p] > 1) log_w += std::lgamma(static_cast<double>(occ[p]) + 1.0);
        const std::int64_t r = state.basis->rank(occ);
        out[idx] = state.amplitudes[r] * std::exp(0.5 * log_w);
    }
    return out;
}

BosonHamiltonian::BosonHamiltonian(const LatticeModel& model, int n,
                                   std::shared_ptr<const OccupationBasis> basis)
    : model_(&model), n_(n), basis_(std::move(basis)) {
    if (!basis_) throw std::invalid_argument("hamiltonian: null basis");
    if (model.sites() != basis_->sites())
        throw std::invalid_argument("hamiltonian: model and basis site counts differ");
    if (basis_->particles() != n_)
        throw std::invalid_argument("hamiltonian: basis particle number mismatch");

    const int d = model.sites();
    const auto& kin = model.kinetic();
    hops_.resize(d);
    for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q)
            if (q != p && kin(p, q) != 0.0) hops_[p].push_back({q, kin(p, q)});

    const std::int64_t size = basis_->size();
    const auto& v = model.interaction();
    const double half_inv_n = 0.5 / n_;

    diagonal_.resize(size);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < size; ++i) {
        const auto occ = basis_->occupation(i);
        double diag = 0.0;
        double pair_sum = 0.0;
        double self_sum = 0.0;
        for (int p = 0; p < d; ++p) {
            if (occ[p] == 0) continue;
            diag += kin(p, p) * occ[p];
            self_sum += static_cast<double>(occ[p]) * (occ[p] - 1);
            for (int q = 0; q < d; ++q) {
                if (q == p || occ[q] == 0) continue;
                pair_sum += v[(p - q + d) % d] * occ[p] * occ[q];
            }
        }
        diagonal_[i] = diag + half_inv_n * (pair_sum + v[0] * self_sum);
    }

    if (size <= kAssembleThreshold) {
        row_ptr_.assign(size + 1, 0);
        std::vector<std::int64_t> cols;
        std::vector<double> vals;
        std::vector<int> scratch(d);
        // serial two-pass kept simple: assembly happens once per (model, N)
        for (std::int64_t i = 0; i < size; ++i) {
            cols.clear();
            vals.clear();
            build_row(i, cols, vals, scratch);
            row_ptr_[i + 1] = row_ptr_[i] + static_cast<std::int64_t>(cols.size());
            col_.insert(col_.end(), cols.begin(), cols.end());
            val_.insert(val_.end(), vals.begin(), vals.end());
        }
        assembled_ = true;
    }
}

void BosonHamiltonian::build_row(std::int64_t row, std::vector<std::int64_t>& cols,
                                 std::vector<double>& vals, std::vector<int>& scratch) const {
    const auto occ = basis_->occupation(row);
    cols.push_back(row);
    vals.push_back(diagonal_[row]);
    const int d = basis_->sites();
    std::copy(occ.begin(), occ.end(), scratch.begin());
    for (int p = 0; p < d; ++p) {
        if (occ[p] == 0) continue;
        for (const auto& [q, w] : hops_[p]) {
            // column state m = occ - e_p + e_q; element w * sqrt(n_p (n_q + 1))
            scratch[p] -= 1;
            scratch[q] += 1;
            cols.push_back(basis_->rank(scratch));
            vals.push_back(w * std::sqrt(static_cast<double>(occ[p]) * (occ[q] + 1)));
            scratch[p] += 1;
            scratch[q] -= 1;
        }
    }
}

void BosonHamiltonian::apply_csr(const Eigen::VectorXcd& x, Eigen::VectorXcd& y,
                                 bool parallel) const {
    const std::int64_t size = basis_->size();
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t i = 0; i < size; ++i) {
        std::complex<double> acc(0.0, 0.0);
        for (std::int64_t s = row_ptr_[i]; s < row_ptr_[i + 1]; ++s) acc += val_[s] * x[col_[s]];
        y[i] = acc;
    }
}

void BosonHamiltonian::apply_matrix_free(const Eigen::VectorXcd& x, Eigen::VectorXcd& y,
                                         bool parallel) const {
    const std::int64_t size = basis_->size();
    const int d = basis_->sites();
    std::vector<int> scratch(d);
#pragma omp parallel for schedule(static) firstprivate(scratch) if (parallel)
    for (std::int64_t i = 0; i < size; ++i) {
        const auto occ = basis_->occupation(i);
        std::complex<double> acc = diagonal_[i] * x[i];
        std::copy(occ.begin(), occ.end(), scratch.begin());
        for (int p = 0; p < d; ++p) {
            if (occ[p] == 0) continue;
            for (const auto& [q, w] : hops_[p]) {
                scratch[p] -= 1;
                scratch[q] += 1;
                const std::int64_t j = basis_->rank(scratch);
                acc += w * std::sqrt(static_cast<double>(occ[p]) * (occ[q] + 1)) * x[j];
                scratch[p] += 1;
                scratch[q] -= 1;
            }
        }
        y[i] = acc;
    }
}

void BosonHamiltonian::apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
    if (x.size() != dim()) throw std::invalid_argument("hamiltonian apply: dimension mismatch");
    y.resize(dim());
    if (assembled_) apply_csr(x, y, true);
    else apply_matrix_free(x, y, true);
}

void BosonHamiltonian::apply_serial(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
    if (x.size() != dim()) throw std::invalid_argument("hamiltonian apply: dimension mismatch");
    y.resize(dim());
    if (assembled_) apply_csr(x, y, false);
    else apply_matrix_free(x, y, false);
}

Eigen::VectorXcd BosonHamiltonian::apply(const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd y;
    apply(x, y);
    return y;
}

Eigen::MatrixXd BosonHamiltonian::dense_real() const {
    const std::int64_t size = basis_->size();
    if (size > 8192) throw BudgetError("dense Hamiltonian beyond 8192 dimensions refused");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
    if (assembled_) {
        for (std::int64_t i = 0; i < size; ++i)
            for (std::int64_t s = row_ptr_[i]; s < row_ptr_[i + 1]; ++s) m(i, col_[s]) += val_[s];
    } else {
        std::vector<std::int64_t> cols;
        std::vector<double> vals;
        std::vector<int> scratch(basis_->sites());
        for (std::int64_t i = 0; i < size; ++i) {
            cols.clear();
            vals.clear();
            build_row(i, cols, vals, scratch);
            for (std::size_t s = 0; s < cols.size(); ++s) m(i, cols[s]) += vals[s];
        }
    }
    return m;
}

SymmetricState apply_hamiltonian(const BosonHamiltonian& h, const SymmetricState& state) {
    if (state.basis.get() != &h.basis())
        throw std::invalid_argument("apply_hamiltonian: state uses a different basis");
    SymmetricState out{state.basis, h.apply(state.amplitudes)};
    return out;
}

} // namespace mflab
