#pragma once

#include <functional>
#include <string>

#include "phiot/errors.hpp"

namespace phiot {

enum class RegKind { Shannon, Quadratic, Tsallis, Custom };

// An entropy-function triple (phi, psi = phi*, psi') normalized so that
// phi(1) = phi'(1) = 0, equivalently psi(0) = 0 and psi'(0) = 1. The
// normalization is what lets every downstream matching-equation bracket
// pivot on psi'(0) = 1.
//
// Built-ins:
//   shannon    phi(z) = z log z - z + 1        psi(y) = e^y - 1
//   quadratic  phi(z) = (z - 1)^2 / 2          psi(y) = ((y+1)_+^2 - 1) / 2
//   tsallis p  phi(z) = (z^p - p(z-1) - 1)/(p(p-1)),
//              psi(y) = ((1 + (p-1) y)_+^{p/(p-1)} - 1)/p
class Regularizer {
public:
    using Fn = std::function<double(double)>;

    static Regularizer shannon();
    static Regularizer quadratic();
    static Regularizer tsallis(double p);  // requires p > 1

    // Builds a regularizer from a raw entropy triple, applying the affine
    // normalization phi(z) <- phi(z) - phi(1) - phi'(1) (z - 1) internally.
    // `phi_at_one` and `dphi_at_one` are the exact values of the raw phi(1)
    // and phi'(1); the matching shifts of psi follow from conjugacy.
    static Regularizer from_triple(Fn phi, Fn psi, Fn psi_prime, Fn psi_second,
                                   double phi_at_one, double dphi_at_one);

    // phi(z) for z >= 0, with the z = 0 limit value; DomainError for z < 0.
    double phi(double z) const;
    double psi(double y) const { return psi_(y); }
    // Nonnegative and nondecreasing, psi_prime(0) = 1. Right-continuous
    // value at kinks.
    double psi_prime(double y) const { return psi_prime_(y); }
    double psi_second(double y) const { return psi_second_(y); }

    RegKind kind() const { return kind_; }
    bool has_closed_transform() const { return kind_ == RegKind::Shannon; }
    double tsallis_p() const { return tsallis_p_; }
    const std::string& name() const { return name_; }

private:
    Regularizer(RegKind kind, std::string name, Fn phi, Fn psi, Fn psi_prime, Fn psi_second,
                double tsallis_p = 0.0);
    void validate() const;

    RegKind kind_;
    std::string name_;
    Fn phi_, psi_, psi_prime_, psi_second_;
    double tsallis_p_;
};

// Factory keyed by the CLI spelling: "shannon", "quadratic" or "tsallis"
// (the latter takes p > 1). Unknown names raise InvalidParameter.
Regularizer make_regularizer(const std::string& kind, double tsallis_p = 0.0);

}  // namespace phiot
