#ifndef MFLAB_OPERATOR_HPP
#define MFLAB_OPERATOR_HPP

#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

namespace mflab {

// Hermitian linear operator applied matrix-free. Implementations must be
// reentrant: apply() is called concurrently on distinct vectors.
class HermitianOp {
public:
    virtual ~HermitianOp() = default;
    virtual std::int64_t dim() const = 0;
    virtual void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const = 0;

    // Dense real-symmetric form, where affordable (exact propagation path).
    virtual bool has_dense() const { return false; }
    virtual Eigen::MatrixXd dense_real() const {
        throw std::logic_error("operator has no dense form");
    }
};

} // namespace mflab

#endif
