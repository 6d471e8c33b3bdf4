#include "mflab/lattice.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mflab {

namespace {

double require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite value");
    return x;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

PotentialShape PotentialShape::parse(const std::string& text) {
    std::istringstream in(text);
    std::string name;
    in >> name;
    PotentialShape s;
    if (name == "zero" || name.empty()) {
        s.kind = Kind::Zero;
    } else if (name == "constant") {
        s.kind = Kind::Constant;
    } else if (name == "cosine") {
        s.kind = Kind::Cosine;
        s.amplitude = 1.0;
    } else if (name == "gaussian") {
        s.kind = Kind::Gaussian;
        s.amplitude = 1.0;
    } else {
        throw std::invalid_argument("unknown potential shape '" + name + "'");
    }
    std::string kv;
    while (in >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("shape parameter '" + kv + "' is not key=value");
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        try {
            if (key == "value" || key == "amplitude") s.amplitude = std::stod(val);
            else if (key == "offset") s.offset = std::stod(val);
            else if (key == "harmonic") s.harmonic = std::stoi(val);
            else if (key == "width") s.width = std::stod(val);
            else if (key == "center") s.center = std::stod(val);
            else throw std::invalid_argument("unknown shape parameter '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception&) {
            throw std::invalid_argument("bad numeric value in '" + kv + "'");
        }
    }
    require_finite(s.amplitude, "shape amplitude");
    require_finite(s.offset, "shape offset");
    require_finite(s.width, "shape width");
    require_finite(s.center, "shape center");
    if (s.kind == Kind::Gaussian && s.width <= 0.0)
        throw std::invalid_argument("gaussian width must be positive");
    return s;
}

std::string PotentialShape::canonical() const {
    switch (kind) {
        case Kind::Zero: return "zero";
        case Kind::Constant: return "constant value=" + fmt17(amplitude);
        case Kind::Cosine:
            return "cosine amplitude=" + fmt17(amplitude) + " harmonic=" + std::to_string(harmonic) +
                   " offset=" + fmt17(offset);
        case Kind::Gaussian:
            return "gaussian amplitude=" + fmt17(amplitude) + " width=" + fmt17(width) +
                   " center=" + fmt17(center);
    }
    return "zero";
}

double PotentialShape::sample(double x, int d, double period) const {
    switch (kind) {
        case Kind::Zero:
            return 0.0;
        case Kind::Constant:
            return amplitude;
        case Kind::Cosine:
            return amplitude * std::cos(2.0 * M_PI * harmonic * x / period) + offset;
        case Kind::Gaussian: {
            // wrap over periodic images until the tail is below machine precision
            const int images = static_cast<int>(std::ceil(8.0 * width / period)) + 1;
            double sum = 0.0;
            for (int m = -images; m <= images; ++m) {
                const double dx = x - center - m * period;
                sum += std::exp(-dx * dx / (2.0 * width * width));
            }
            return amplitude * sum + offset;
        }
    }
    return 0.0;
}

Eigen::VectorXd interaction_fourier(const Eigen::VectorXd& v) {
    const int d = static_cast<int>(v.size());
    Eigen::VectorXd vhat(d);
    for (int q = 0; q < d; ++q) {
        // V even => imaginary parts cancel exactly; sum cosines only
        double acc = 0.0;
        for (int r = 0; r < d; ++r) acc += v[r] * std::cos(2.0 * M_PI * q * r / d);
        vhat[q] = acc / d;
    }
    return vhat;
}

LatticeModel::LatticeModel(int d, double period, const PotentialShape& u, const PotentialShape& v)
    : d_(d), period_(period), u_spec_(u), v_spec_(v) {
    if (d < 1) throw std::invalid_argument("lattice needs at least one site");
    if (!(period > 0.0) || !std::isfinite(period))
        throw std::invalid_argument("lattice period must be positive and finite");

    const double spacing = period_ / d_;
    const double inv_a2 = 1.0 / (spacing * spacing);  // (d/period)^2

    u_samples_.resize(d_);
    for (int p = 0; p < d_; ++p) u_samples_[p] = require_finite(u.sample(p * spacing, d_, period_), "U sample");

    kinetic_ = Eigen::MatrixXd::Zero(d_, d_);
    for (int p = 0; p < d_; ++p) kinetic_(p, p) = u_samples_[p];
    if (d_ > 1) {
        // 3-point periodic second difference
        for (int p = 0; p < d_; ++p) {
            kinetic_(p, p) += 2.0 * inv_a2;
            kinetic_(p, (p + 1) % d_) += -inv_a2;
            kinetic_(p, (p + d_ - 1) % d_) += -inv_a2;
        }
    }
    kinetic_c_ = kinetic_.cast<std::complex<double>>();

    if (v.kind == PotentialShape::Kind::Gaussian && v.center != 0.0)
        throw std::invalid_argument("interaction shape must be even: gaussian center must be 0");

    v_samples_.resize(d_);
    for (int r = 0; r < d_; ++r) {
        // sample at the displacement folded to [-period/2, period/2] so the
        // vector is even by construction for any even shape
        const double x = (r <= d_ / 2) ? r * spacing : (r - d_) * spacing;
        v_samples_[r] = require_finite(v.sample(std::abs(x), d_, period_), "V sample");
    }
    for (int r = 0; r < d_; ++r) {
        if (v_samples_[r] != v_samples_[(d_ - r) % d_])
            throw std::logic_error("interaction samples are not even under r -> d-r");
    }

    sup_norm_v_ = v_samples_.cwiseAbs().maxCoeff();
    fourier_l1_v_ = interaction_fourier(v_samples_).cwiseAbs().sum();
    if (sup_norm_v_ > 0.0) lambda_v_ = 1.0 + fourier_l1_v_ / sup_norm_v_;

    eig_ = sym_eig(kinetic_);
}

std::string LatticeModel::describe() const {
    std::ostringstream out;
    out << "d=" << d_ << ";period=" << fmt17(period_) << ";u=" << u_spec_.canonical()
        << ";v=" << v_spec_.canonical();
    return out.str();
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string LatticeModel::digest() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(describe())));
    return buf;
}

InteractionNorms interaction_norms(const LatticeModel& model) {
    return {model.sup_norm_v(), model.fourier_l1_v(), model.lambda_v()};
}

} // namespace mflab
