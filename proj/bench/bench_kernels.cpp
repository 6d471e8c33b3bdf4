// Times the OpenMP kernels against their serial reference implementations:
// symmetric-subspace Hamiltonian application, full-space application, and
// k-marginal extraction.

#include <chrono>
#include <cstdio>
#include <functional>
#include <memory>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mflab/distinguishable.hpp"
#include "mflab/fock.hpp"
#include "mflab/lattice.hpp"
#include "mflab/rdm.hpp"
#include "mflab/rng.hpp"

using namespace mflab;

namespace {

double seconds(const std::function<void()>& body, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) body();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void report(const char* name, std::int64_t dim, double serial, double parallel) {
    std::printf("%-28s dim=%-8lld serial %.4fs  omp %.4fs  speedup %.2fx\n", name,
                static_cast<long long>(dim), serial, parallel, serial / parallel);
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif

    const LatticeModel model(8, 8.0, PotentialShape::parse("zero"),
                             PotentialShape::parse("cosine amplitude=0.5"));
    GaussianRng rng(7);

    {
        const int n = 8;  // C(15,8) = 6435, CSR path
        auto basis = std::make_shared<OccupationBasis>(8, n);
        BosonHamiltonian h(model, n, basis);
        Eigen::VectorXcd x = rng.unit_vector(h.dim()), y(h.dim());
        report("boson-hamiltonian (csr)", h.dim(),
               seconds([&] { h.apply_serial(x, y); }, 50),
               seconds([&] { h.apply(x, y); }, 50));
    }
    {
        const int n = 12;  // C(19,12) = 50388
        auto basis = std::make_shared<OccupationBasis>(8, n);
        BosonHamiltonian h(model, n, basis);
        Eigen::VectorXcd x = rng.unit_vector(h.dim()), y(h.dim());
        report("boson-hamiltonian (csr)", h.dim(),
               seconds([&] { h.apply_serial(x, y); }, 10),
               seconds([&] { h.apply(x, y); }, 10));
    }
    {
        const LatticeModel small(4, 4.0, PotentialShape::parse("zero"),
                                 PotentialShape::parse("cosine amplitude=0.5"));
        FullSpaceHamiltonian h(small, 9);  // 4^9 = 262144
        Eigen::VectorXcd x = rng.unit_vector(h.dim()), y(h.dim());
        report("full-space hamiltonian", h.dim(),
               seconds([&] { h.apply_serial(x, y); }, 10),
               seconds([&] { h.apply(x, y); }, 10));
    }
    {
        const int n = 8;
        auto basis = std::make_shared<OccupationBasis>(8, n);
        SymmetricState state{basis, rng.unit_vector(basis->size())};
        report("2-marginal extraction", basis->size(),
               seconds([&] { k_rdm_serial(state, 2); }, 5),
               seconds([&] { k_rdm(state, 2); }, 5));
    }
    return 0;
}
