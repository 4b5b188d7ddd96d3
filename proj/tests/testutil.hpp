#pragma once

#include <cmath>
#include <random>

#include "phiot/losses.hpp"
#include "phiot/oracles.hpp"

namespace phiot::testutil {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline DiscreteMeasure random_measure(std::mt19937_64& g, Index n, Index d = 1) {
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    std::uniform_real_distribution<double> weight(0.2, 1.0);
    Matrix pts(n, d);
    Vector w(n);
    for (Index i = 0; i < n; ++i) {
        for (Index k = 0; k < d; ++k) pts(i, k) = coord(g);
        w[i] = weight(g);
    }
    w /= w.sum();
    return make_measure(std::move(pts), std::move(w));
}

inline CostMatrix random_cost(std::mt19937_64& g, Index n, Index m, double scale = 1.0) {
    std::uniform_real_distribution<double> entry(0.0, scale);
    Matrix c(n, m);
    for (Index j = 0; j < m; ++j)
        for (Index i = 0; i < n; ++i) c(i, j) = entry(g);
    return make_cost(std::move(c));
}

inline Vector random_vector(std::mt19937_64& g, Index n, double lo, double hi) {
    std::uniform_real_distribution<double> entry(lo, hi);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = entry(g);
    return v;
}

// The symmetric 2x2 fixture: uniform marginals on {0,1} with cost
// [[0,1],[1,0]]. Its transport polytope is the one-parameter family
// gamma(a) = [[a, 1/2-a], [1/2-a, a]], a in [0, 1/2].
inline Problem fixture_2x2(double eps, const Regularizer& reg) {
    Matrix pts(2, 1);
    pts << 0.0, 1.0;
    auto m = uniform_measure(pts);
    Matrix c(2, 2);
    c << 0.0, 1.0, 1.0, 0.0;
    return Problem{m, m, make_cost(std::move(c)), eps, reg};
}

inline double fixture_2x2_objective(double a, double eps, const Regularizer& reg) {
    Matrix gamma(2, 2);
    gamma << a, 0.5 - a, 0.5 - a, a;
    double val = 0.0;
    const Matrix cost = fixture_2x2(eps, reg).cost.entries;
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j)
            val += cost(i, j) * gamma(i, j) + eps * reg.phi(gamma(i, j) * 4.0) * 0.25;
    return val;
}

// Golden-section minimizer over [lo, hi] for a unimodal objective.
template <class F>
double golden_min(F&& f, double lo, double hi, int iters = 200) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int k = 0; k < iters; ++k) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

inline double l1_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().sum(); }

}  // namespace phiot::testutil
