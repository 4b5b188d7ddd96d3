#include "phiot/regularizers.hpp"

#include <cmath>
#include <utility>

namespace phiot {

namespace {

// Exponentials are clamped at argument 700 to stay finite; the log-domain
// shannon transform keeps production solves away from this guard.
inline double safe_exp(double t) { return std::exp(std::min(t, 700.0)); }

}  // namespace

Regularizer::Regularizer(RegKind kind, std::string name, Fn phi, Fn psi, Fn psi_prime,
                         Fn psi_second, double tsallis_p)
    : kind_(kind),
      name_(std::move(name)),
      phi_(std::move(phi)),
      psi_(std::move(psi)),
      psi_prime_(std::move(psi_prime)),
      psi_second_(std::move(psi_second)),
      tsallis_p_(tsallis_p) {
    validate();
}

double Regularizer::phi(double z) const {
    if (z < 0.0) throw DomainError("phi is defined on [0, inf)");
    return phi_(z);
}

Regularizer Regularizer::shannon() {
    return Regularizer(
        RegKind::Shannon, "shannon",
        [](double z) { return z == 0.0 ? 1.0 : z * std::log(z) - z + 1.0; },
        [](double y) { return safe_exp(y) - 1.0; },
        [](double y) { return safe_exp(y); },
        [](double y) { return safe_exp(y); });
}

Regularizer Regularizer::quadratic() {
    return Regularizer(
        RegKind::Quadratic, "quadratic",
        [](double z) { return 0.5 * (z - 1.0) * (z - 1.0); },
        [](double y) {
            const double w = std::max(y + 1.0, 0.0);
            return 0.5 * (w * w - 1.0);
        },
        [](double y) { return std::max(y + 1.0, 0.0); },
        [](double y) { return y >= -1.0 ? 1.0 : 0.0; });
}

Regularizer Regularizer::tsallis(double p) {
    if (!(p > 1.0)) throw InvalidParameter("tsallis entropy requires p > 1");
    const double pm1 = p - 1.0;
    // positive part of 1 + (p-1) y, raised to `e` with a clamped exponential
    auto wpow = [pm1](double y, double e) {
        const double w = 1.0 + pm1 * y;
        if (w <= 0.0) return 0.0;
        return safe_exp(e * std::log(w));
    };
    return Regularizer(
        RegKind::Tsallis, "tsallis",
        [p, pm1](double z) {
            if (z == 0.0) return 1.0 / p;
            return (std::pow(z, p) - p * (z - 1.0) - 1.0) / (p * pm1);
        },
        [p, pm1, wpow](double y) { return (wpow(y, p / pm1) - 1.0) / p; },
        [pm1, wpow](double y) { return wpow(y, 1.0 / pm1); },
        [p, pm1, wpow](double y) { return wpow(y, (2.0 - p) / pm1); },
        p);
}

Regularizer Regularizer::from_triple(Fn phi, Fn psi, Fn psi_prime, Fn psi_second,
                                     double phi_at_one, double dphi_at_one) {
    const double a = dphi_at_one;
    const double b = phi_at_one;
    return Regularizer(
        RegKind::Custom, "custom",
        [phi = std::move(phi), a, b](double z) { return phi(z) - b - a * (z - 1.0); },
        [psi = std::move(psi), a, b](double y) { return psi(y + a) + b - a; },
        [psi_prime = std::move(psi_prime), a](double y) { return psi_prime(y + a); },
        [psi_second = std::move(psi_second), a](double y) { return psi_second(y + a); });
}

void Regularizer::validate() const {
    const double h = 1e-6;
    if (std::abs(phi_(1.0)) > 1e-12) throw InvalidParameter("regularizer: phi(1) != 0");
    if (std::abs((phi_(1.0 + h) - phi_(1.0 - h)) / (2.0 * h)) > 1e-6)
        throw InvalidParameter("regularizer: phi'(1) != 0");
    if (std::abs(psi_(0.0)) > 1e-12) throw InvalidParameter("regularizer: psi(0) != 0");
    if (std::abs(psi_prime_(0.0) - 1.0) > 1e-12)
        throw InvalidParameter("regularizer: psi'(0) != 1");

    // monotone nonnegative psi' and convex psi on a fixed grid of [-5, 5]
    const int n = 101;
    double prev_p = psi_prime_(-5.0);
    if (prev_p < 0.0) throw InvalidParameter("regularizer: psi' < 0");
    double y0 = -5.0, y1 = -5.0 + 10.0 / (n - 1);
    double f0 = psi_(y0), f1 = psi_(y1);
    for (int k = 1; k < n; ++k) {
        const double y = -5.0 + 10.0 * k / (n - 1);
        const double cur_p = psi_prime_(y);
        if (cur_p < 0.0) throw InvalidParameter("regularizer: psi' < 0");
        if (cur_p < prev_p - 1e-12) throw InvalidParameter("regularizer: psi' not monotone");
        prev_p = cur_p;
        if (k >= 2) {
            const double y2 = y;
            const double f2 = psi_(y2);
            if (f2 - 2.0 * f1 + f0 < -1e-9) throw InvalidParameter("regularizer: psi not convex");
            y0 = y1; f0 = f1; y1 = y2; f1 = f2;
        }
    }

    // Fenchel-Young on a small sample
    const double zs[] = {0.1, 0.5, 1.0, 2.0, 5.0};
    const double ys[] = {-2.0, -1.0, 0.0, 1.0, 2.0};
    for (double z : zs)
        for (double y : ys)
            if (phi_(z) + psi_(y) < z * y - 1e-10)
                throw InvalidParameter("regularizer: Fenchel-Young violated");
}

Regularizer make_regularizer(const std::string& kind, double tsallis_p) {
    if (kind == "shannon") return Regularizer::shannon();
    if (kind == "quadratic") return Regularizer::quadratic();
    if (kind == "tsallis") return Regularizer::tsallis(tsallis_p);
    throw InvalidParameter("unknown regularizer '" + kind + "'");
}

}  // namespace phiot
