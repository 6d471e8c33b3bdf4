#include "mflab/hartree.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "mflab/linalg.hpp"

namespace mflab {

using std::complex;

Eigen::VectorXd convolve_interaction(const LatticeModel& model, const Eigen::VectorXd& density) {
    const int d = model.sites();
    if (density.size() != d) throw std::invalid_argument("convolve_interaction: length mismatch");
    const auto& v = model.interaction();
    Eigen::VectorXd out(d);
    for (int p = 0; p < d; ++p) {
        double acc = 0.0;
        for (int r = 0; r < d; ++r) acc += v[r] * density[(p - r + d) % d];
        out[p] = acc;
    }
    return out;
}

namespace {

// exact kinetic sub-flow exp(-i h tau)
void kinetic_flow(const SymEig& eig, double tau, Eigen::VectorXcd& phi) {
    Eigen::VectorXcd coeff = apply_real_matrix(eig.vectors.transpose(), phi);
    for (Eigen::Index i = 0; i < coeff.size(); ++i)
        coeff[i] *= std::exp(complex<double>(0.0, -eig.values[i] * tau));
    phi = apply_real_matrix(eig.vectors, coeff);
}

void check_finite(const Eigen::VectorXcd& phi) {
    if (!phi.allFinite()) throw std::runtime_error("hartree_solve: non-finite amplitudes");
}

} // namespace

HartreeOrbital hartree_solve(const LatticeModel& model, const HartreeOrbital& phi0, double t,
                             double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("hartree_solve: dt must be positive");
    if (!std::isfinite(t)) throw std::invalid_argument("hartree_solve: t must be finite");
    if (phi0.phi.size() != model.sites())
        throw std::invalid_argument("hartree_solve: orbital length mismatch");
    if (std::abs(phi0.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("hartree_solve: orbital is not normalized");

    const SymEig& eig = model.kinetic_eig();
    const int steps = std::max<int>(1, static_cast<int>(std::ceil(std::abs(t) / dt - 1e-12)));
    const double tau = t / steps;  // carries the sign of t

    Eigen::VectorXcd phi = phi0.phi;
    for (int s = 0; s < steps; ++s) {
        kinetic_flow(eig, 0.5 * tau, phi);
        const Eigen::VectorXd rho = phi.cwiseAbs2();
        const Eigen::VectorXd field = convolve_interaction(model, rho);
        for (int p = 0; p < model.sites(); ++p)
            phi[p] *= std::exp(complex<double>(0.0, -field[p] * tau));
        kinetic_flow(eig, 0.5 * tau, phi);
    }
    check_finite(phi);
    return {phi, phi0.time + t};
}

HartreeOrbital hartree_solve_adaptive(const LatticeModel& model, const HartreeOrbital& phi0,
                                      double t, double dt0, double tol) {
    if (t == 0.0) return {phi0.phi, phi0.time};
    HartreeOrbital coarse = hartree_solve(model, phi0, t, dt0);
    double dt = dt0;
    for (int level = 0; level < 24; ++level) {
        dt *= 0.5;
        HartreeOrbital fine = hartree_solve(model, phi0, t, dt);
        if ((fine.phi - coarse.phi).norm() <= tol) return fine;
        coarse = std::move(fine);
    }
    throw std::runtime_error("hartree_solve_adaptive: no dt convergence to tolerance");
}

double hartree_energy(const LatticeModel& model, const HartreeOrbital& orbital) {
    const Eigen::VectorXcd& phi = orbital.phi;
    const Eigen::VectorXcd hphi = apply_real_matrix(model.kinetic(), phi);
    const double kinetic = phi.dot(hphi).real();
    const Eigen::VectorXd rho = phi.cwiseAbs2();
    const double interaction = 0.5 * rho.dot(convolve_interaction(model, rho));
    return kinetic + interaction;
}

} // namespace mflab
