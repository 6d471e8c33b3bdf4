#include "mflab/propagate.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "mflab/errors.hpp"

namespace mflab {

using std::complex;

void PropagatorConfig::validate() const {
    if (!(step_tol > 0.0)) throw std::invalid_argument("propagator: step_tol must be positive");
    if (krylov_dim < 4) throw std::invalid_argument("propagator: krylov_dim must be at least 4");
    if (!(max_step > 0.0)) throw std::invalid_argument("propagator: max_step must be positive");
}

Propagator::Propagator(const HermitianOp& h, PropagatorConfig cfg) : h_(&h), cfg_(cfg) {
    cfg_.validate();
    switch (cfg_.method) {
        case PropagatorConfig::Method::FullEig: use_dense_ = true; break;
        case PropagatorConfig::Method::Krylov: use_dense_ = false; break;
        case PropagatorConfig::Method::Auto:
            use_dense_ = h.has_dense() && h.dim() <= cfg_.dense_threshold;
            break;
    }
    if (use_dense_ && !h.has_dense())
        throw std::invalid_argument("propagator: full-eig method requested but operator has no dense form");
}

const SymEig& Propagator::spectral() const {
    std::call_once(eig_once_, [&] { eig_ = sym_eig(h_->dense_real()); });
    return *eig_;
}

EvolveStats Propagator::stats() const {
    std::lock_guard lock(stats_mutex_);
    return stats_;
}

Eigen::VectorXcd Propagator::evolve(const Eigen::VectorXcd& psi, double t) const {
    if (psi.size() != h_->dim()) throw std::invalid_argument("evolve: dimension mismatch");
    if (!std::isfinite(t)) throw std::invalid_argument("evolve: time must be finite");
    const double in_norm = psi.norm();
    if (in_norm == 0.0) return Eigen::VectorXcd::Zero(psi.size());
    Eigen::VectorXcd out = use_dense_ ? evolve_dense(psi, t) : evolve_krylov(psi, t);

    // unitarity: the output norm must match the input norm; rescaling is
    // logged rather than silent so propagator bugs stay visible
    const double drift = std::abs(out.norm() / in_norm - 1.0);
    if (drift > 1e-10) {
        out *= in_norm / out.norm();
        std::lock_guard lock(stats_mutex_);
        stats_.renormalizations += 1;
        stats_.max_norm_drift = std::max(stats_.max_norm_drift, drift);
    }
    return out;
}

Eigen::VectorXcd Propagator::evolve_dense(const Eigen::VectorXcd& psi, double t) const {
    const SymEig& eig = spectral();
    const Eigen::VectorXcd coeff = apply_real_matrix(eig.vectors.transpose(), psi);
    Eigen::VectorXcd rotated(coeff.size());
    for (Eigen::Index i = 0; i < coeff.size(); ++i)
        rotated[i] = coeff[i] * std::exp(complex<double>(0.0, -eig.values[i] * t));
    return apply_real_matrix(eig.vectors, rotated);
}

namespace {

// phi = exp(-i tau T) e1 for real symmetric tridiagonal T (alpha, beta)
Eigen::VectorXcd tridiag_exp_e1(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                                double tau) {
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::VectorXd e1_coeff = es.eigenvectors().row(0);
    Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(m);
    for (int i = 0; i < m; ++i) {
        const complex<double> w =
            std::exp(complex<double>(0.0, -es.eigenvalues()[i] * tau)) * e1_coeff[i];
        phi += w * es.eigenvectors().col(i).cast<complex<double>>();
    }
    return phi;
}

} // namespace

Eigen::VectorXcd Propagator::evolve_krylov(const Eigen::VectorXcd& psi, double t) const {
    if (t == 0.0) return psi;
    const std::int64_t n = h_->dim();
    const int m_max = static_cast<int>(std::min<std::int64_t>(cfg_.krylov_dim, n));
    const double direction = (t > 0.0) ? 1.0 : -1.0;
    const double total = std::abs(t);

    Eigen::VectorXcd v = psi;
    double done = 0.0;
    double step = std::min(cfg_.max_step, total);
    std::int64_t steps = 0, rejections = 0;

    std::vector<Eigen::VectorXcd> basis;
    Eigen::VectorXcd w(n);

    while (done < total) {
        step = std::min(step, total - done);

        // Lanczos with full reorthogonalization against the small basis
        basis.clear();
        const double vnorm = v.norm();
        basis.push_back(v / vnorm);
        Eigen::VectorXd alpha(m_max), beta(m_max);
        int m = 0;
        bool breakdown = false;
        for (; m < m_max; ++m) {
            h_->apply(basis[m], w);
            complex<double> a = basis[m].dot(w);
            w -= a * basis[m];
            if (m > 0) w -= complex<double>(beta[m - 1], 0.0) * basis[m - 1];
            // re-orthogonalize once; subspace is tiny
            for (int j = 0; j <= m; ++j) w -= basis[j].dot(w) * basis[j];
            alpha[m] = a.real();
            const double b = w.norm();
            if (m + 1 == m_max) { beta[m] = b; break; }
            beta[m] = b;
            if (b < 1e-13 * std::max(1.0, std::abs(alpha[m]))) {
                breakdown = true;  // invariant subspace: propagation is exact
                break;
            }
            basis.push_back(w / b);
        }
        const int mdim = static_cast<int>(basis.size());

        for (;;) {
            const double tau = std::min(step, total - done);
            const Eigen::VectorXcd phi =
                tridiag_exp_e1(alpha.head(mdim), beta.head(std::max(0, mdim - 1)), direction * tau);
            const double err = breakdown ? 0.0 : std::abs(beta[mdim - 1] * phi[mdim - 1] * tau);
            if (err <= cfg_.step_tol || tau <= 1e-15 * total) {
                Eigen::VectorXcd next = Eigen::VectorXcd::Zero(n);
                for (int j = 0; j < mdim; ++j) next += phi[j] * basis[j];
                v = vnorm * next;
                done += tau;
                ++steps;
                if (err < 0.1 * cfg_.step_tol) step = std::min(step * 1.5, cfg_.max_step);
                break;
            }
            step = tau * 0.5;
            ++rejections;
            if (rejections > 1000)
                throw std::runtime_error("krylov propagation failed to reach step tolerance");
        }
    }

    {
        std::lock_guard lock(stats_mutex_);
        stats_.krylov_steps += steps;
        stats_.krylov_rejections += rejections;
    }
    return v;
}

SymmetricState evolve(const BosonHamiltonian& h, const SymmetricState& state, double t,
                      const PropagatorConfig& cfg) {
    Propagator prop(h, cfg);
    return {state.basis, prop.evolve(state.amplitudes, t)};
}

double energy(const HermitianOp& h, const Eigen::VectorXcd& psi) {
    Eigen::VectorXcd hpsi(psi.size());
    h.apply(psi, hpsi);
    return psi.dot(hpsi).real();
}

double energy(const BosonHamiltonian& h, const SymmetricState& state) {
    return energy(static_cast<const HermitianOp&>(h), state.amplitudes);
}

} // namespace mflab
