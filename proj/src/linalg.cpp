#include "mflab/linalg.hpp"

#include <stdexcept>

#ifdef MFLAB_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace mflab {

SymEig sym_eig(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("sym_eig: matrix not square");
    SymEig out;
#ifdef MFLAB_HAVE_LAPACKE
    const lapack_int n = static_cast<lapack_int>(m.rows());
    out.vectors = m;  // dsyevd overwrites with eigenvectors
    out.values.resize(n);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(),
                                           n, out.values.data());
    if (info != 0) throw std::runtime_error("sym_eig: dsyevd failed, info=" + std::to_string(info));
#else
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw std::runtime_error("sym_eig: eigensolver failed");
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
#endif
    return out;
}

double trace_norm(const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues().sum();
}

double herm_abs_eigen_sum(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("herm_abs_eigen_sum: eigensolver failed");
    return es.eigenvalues().cwiseAbs().sum();
}

double spectral_norm(const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()[0];
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

} // namespace mflab
