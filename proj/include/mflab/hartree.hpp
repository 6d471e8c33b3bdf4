#ifndef MFLAB_HARTREE_HPP
#define MFLAB_HARTREE_HPP

#include <Eigen/Dense>

#include "mflab/lattice.hpp"

namespace mflab {

struct HartreeOrbital {
    Eigen::VectorXcd phi;
    double time = 0.0;

    double norm() const { return phi.norm(); }
};

// Circular convolution (V * rho)_p = sum_r V(r) rho_{(p-r) mod d}.
Eigen::VectorXd convolve_interaction(const LatticeModel& model, const Eigen::VectorXd& density);

// Integrates i d/dt phi = h phi + (V * |phi|^2) phi by Strang splitting with
// exact kinetic sub-flow (cached eigendecomposition of h) and a diagonal
// nonlinear phase. Both sub-flows are norm-preserving, so any norm drift is a
// bug, not a discretization artifact. Global error O(dt^2); t may be negative.
HartreeOrbital hartree_solve(const LatticeModel& model, const HartreeOrbital& phi0, double t,
                             double dt);

// Halves dt (starting from dt0) until two successive refinements agree to
// `tol` in l2, then returns the finer solution.
HartreeOrbital hartree_solve_adaptive(const LatticeModel& model, const HartreeOrbital& phi0,
                                      double t, double dt0 = 1e-3, double tol = 1e-8);

// <phi, h phi> + 1/2 <|phi|^2, V * |phi|^2>; conserved along the flow.
double hartree_energy(const LatticeModel& model, const HartreeOrbital& orbital);

} // namespace mflab

#endif
