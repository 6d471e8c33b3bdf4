#ifndef MFLAB_LINALG_HPP
#define MFLAB_LINALG_HPP

#include <complex>

#include <Eigen/Dense>

namespace mflab {

// Spectral data of a real symmetric matrix, eigenvalues ascending.
struct SymEig {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // columns
};

// Real symmetric eigendecomposition. Dispatches to LAPACK dsyevd when built
// with it (the Eigen path is noticeably slower past dimension ~1000).
SymEig sym_eig(const Eigen::MatrixXd& m);

// y = M x for real M and complex x, as two real mat-vecs.
inline Eigen::VectorXcd apply_real_matrix(const Eigen::MatrixXd& m, const Eigen::VectorXcd& x) {
    const Eigen::VectorXd re = m * x.real();
    const Eigen::VectorXd im = m * x.imag();
    Eigen::VectorXcd y(m.rows());
    y.real() = re;
    y.imag() = im;
    return y;
}

// Trace norm (sum of singular values) of a general complex matrix.
double trace_norm(const Eigen::MatrixXcd& m);

// Sum of |eigenvalues| of a Hermitian matrix.
double herm_abs_eigen_sum(const Eigen::MatrixXcd& m);

// Spectral norm (largest singular value).
double spectral_norm(const Eigen::MatrixXcd& m);

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

} // namespace mflab

#endif
