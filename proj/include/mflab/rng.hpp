#ifndef MFLAB_RNG_HPP
#define MFLAB_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace mflab {

// splitmix64, used to derive independent per-cell seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    return mix_seed(master ^ mix_seed(a ^ mix_seed(b ^ mix_seed(c))));
}

// Gaussian sampler with an explicit Box-Muller transform. std::normal_distribution
// is implementation-defined; this keeps streams identical across standard libraries.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    std::complex<double> complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

    double uniform() {  // [0,1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    Eigen::VectorXcd unit_vector(Eigen::Index n) {
        Eigen::VectorXcd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = complex_normal();
        v.normalize();
        return v;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace mflab

#endif
