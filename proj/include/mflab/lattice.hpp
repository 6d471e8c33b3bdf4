#ifndef MFLAB_LATTICE_HPP
#define MFLAB_LATTICE_HPP

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "mflab/linalg.hpp"

namespace mflab {

// Catalog of potential shapes for the on-site potential U and the pair
// interaction V. Text form: "zero" | "constant value=c" |
// "cosine amplitude=a harmonic=h offset=b" | "gaussian amplitude=a width=w center=c".
struct PotentialShape {
    enum class Kind { Zero, Constant, Cosine, Gaussian };

    Kind kind = Kind::Zero;
    double amplitude = 0.0;
    double offset = 0.0;
    int harmonic = 1;
    double width = 1.0;
    double center = 0.0;  // on-site potentials only; interactions must stay even

    static PotentialShape parse(const std::string& text);
    std::string canonical() const;

    // Sample at physical position x on a ring of circumference `period`
    // (gaussian is wrapped over periodic images).
    double sample(double x, int d, double period) const;
};

// Periodic 1-D single-particle space: h = -laplacian + U on d sites, plus the
// pair interaction sampled at lattice displacements and its derived constants.
class LatticeModel {
public:
    LatticeModel(int d, double period, const PotentialShape& u, const PotentialShape& v);

    int sites() const { return d_; }
    double period() const { return period_; }
    const Eigen::MatrixXd& kinetic() const { return kinetic_; }         // real symmetric
    const Eigen::MatrixXcd& kinetic_complex() const { return kinetic_c_; }
    const Eigen::VectorXd& interaction() const { return v_samples_; }   // V at displacement r
    const Eigen::VectorXd& onsite() const { return u_samples_; }

    double sup_norm_v() const { return sup_norm_v_; }
    double fourier_l1_v() const { return fourier_l1_v_; }
    // 1 + fourier_l1 / sup_norm; empty when V vanishes.
    std::optional<double> lambda_v() const { return lambda_v_; }

    // Spectral data of the one-body matrix, computed once and shared.
    const SymEig& kinetic_eig() const { return eig_; }

    const PotentialShape& u_spec() const { return u_spec_; }
    const PotentialShape& v_spec() const { return v_spec_; }

    // Canonical description string; FNV-1a hash of it serves as model digest.
    std::string describe() const;
    std::string digest() const;

private:
    int d_;
    double period_;
    PotentialShape u_spec_, v_spec_;
    Eigen::MatrixXd kinetic_;
    Eigen::MatrixXcd kinetic_c_;
    Eigen::VectorXd u_samples_, v_samples_;
    double sup_norm_v_ = 0.0;
    double fourier_l1_v_ = 0.0;
    std::optional<double> lambda_v_;
    SymEig eig_;
};

struct InteractionNorms {
    double sup_norm;
    double fourier_l1;
    std::optional<double> lambda;
};

InteractionNorms interaction_norms(const LatticeModel& model);

// Fourier coefficients under the convention V(r) = sum_q vhat(q) e^{2 pi i q r / d}.
// Real for even real V.
Eigen::VectorXd interaction_fourier(const Eigen::VectorXd& v_samples);

std::uint64_t fnv1a(const std::string& text);

} // namespace mflab

#endif
