#ifndef MFLAB_FOCK_HPP
#define MFLAB_FOCK_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mflab/lattice.hpp"
#include "mflab/operator.hpp"

namespace mflab {

// Exact binomial in 64-bit; throws std::overflow_error instead of wrapping.
std::int64_t checked_binomial(int n, int k);

// Occupation-number basis of N bosons on d sites. States are ordered
// reverse-lexicographically: index 0 is (N,0,...,0), the last is (0,...,0,N).
// rank/unrank use stars-and-bars counting against a binomial table.
class OccupationBasis {
public:
    OccupationBasis(int sites, int particles);

    int sites() const { return d_; }
    int particles() const { return n_; }
    std::int64_t size() const { return size_; }

    std::span<const int> occupation(std::int64_t index) const {
        return {occupations_.data() + index * d_, static_cast<std::size_t>(d_)};
    }
    std::int64_t rank(std::span<const int> occ) const;

    static std::int64_t dimension(int sites, int particles);

private:
    std::int64_t count_greater(int value, int remaining, int slots_after) const;

    int d_, n_;
    std::int64_t size_;
    std::vector<int> occupations_;        // flat, size_*d_
    std::vector<std::int64_t> binomial_;  // (n+d+1)^2 Pascal table, -1 = overflow
    int binomial_stride_;
};

// Normalized amplitude vector over an occupation basis.
struct SymmetricState {
    std::shared_ptr<const OccupationBasis> basis;
    Eigen::VectorXcd amplitudes;

    double norm() const { return amplitudes.norm(); }
    int sites() const { return basis->sites(); }
    int particles() const { return basis->particles(); }
};

// N-fold product state phi^{(x)N} in the occupation representation.
// Amplitude on occupation n is sqrt(N!/prod n_p!) * prod phi_p^{n_p}.
SymmetricState product_state(const Eigen::VectorXcd& phi, int n,
                             std::shared_ptr<const OccupationBasis> basis);

// Embeds a symmetric state into the full tensor-product space (d^N amplitudes,
// particle 1 = most significant digit). Guarded oracle-scale operation.
Eigen::VectorXcd to_full_vector(const SymmetricState& state, std::int64_t budget = 2'000'000);

// Second-quantized N-boson Hamiltonian on the symmetric subspace:
// sum_{pq} h_{pq} a+_p a_q + (1/2N) [ sum_{p!=q} V(p-q) n_p n_q + V(0) sum_p n_p(n_p-1) ].
// All matrix elements are real. Rows are assembled into CSR once when the
// dimension is small enough; above the threshold applications recompute the
// hops on the fly (matrix-free).
class BosonHamiltonian : public HermitianOp {
public:
    static constexpr std::int64_t kAssembleThreshold = 200'000;

    BosonHamiltonian(const LatticeModel& model, int n,
                     std::shared_ptr<const OccupationBasis> basis);

    std::int64_t dim() const override { return basis_->size(); }
    void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const override;
    void apply_serial(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;
    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;

    bool has_dense() const override { return true; }
    Eigen::MatrixXd dense_real() const override;

    bool assembled() const { return assembled_; }
    const OccupationBasis& basis() const { return *basis_; }
    std::shared_ptr<const OccupationBasis> basis_ptr() const { return basis_; }
    const LatticeModel& model() const { return *model_; }
    int particles() const { return n_; }

private:
    void build_row(std::int64_t row, std::vector<std::int64_t>& cols,
                   std::vector<double>& vals, std::vector<int>& scratch) const;
    void apply_matrix_free(const Eigen::VectorXcd& x, Eigen::VectorXcd& y, bool parallel) const;
    void apply_csr(const Eigen::VectorXcd& x, Eigen::VectorXcd& y, bool parallel) const;

    const LatticeModel* model_;
    int n_;
    std::shared_ptr<const OccupationBasis> basis_;
    Eigen::VectorXd diagonal_;
    // one-body adjacency: nonzero off-diagonal columns of the kinetic matrix
    std::vector<std::vector<std::pair<int, double>>> hops_;
    // CSR (values real; operator is real symmetric)
    bool assembled_ = false;
    std::vector<std::int64_t> row_ptr_;
    std::vector<std::int64_t> col_;
    std::vector<double> val_;
};

SymmetricState apply_hamiltonian(const BosonHamiltonian& h, const SymmetricState& state);

} // namespace mflab

#endif
