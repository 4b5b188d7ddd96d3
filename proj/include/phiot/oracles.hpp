#pragma once

#include <functional>

#include "phiot/sinkhorn.hpp"

namespace phiot {

// Slow, obviously-correct references used by tests.
struct OracleResult {
    double value = 0.0;
    Matrix argmin;       // coupling masses, original atom order
    double resolution = 0.0;
};

// Unregularized 1-D transport cost for |x-y|^p, p >= 1, via the monotone
// (north-west corner on sorted atoms) coupling, which is optimal on the
// line for such costs.
OracleResult exact_ot_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);

// Direct minimization of the regularized primal over the transportation
// polytope: grid search over the free entries at the given resolution,
// then three rounds of 10x local refinement. Accepts polytopes of
// dimension (I-1)(J-1) <= 4.
OracleResult brute_force_primal(const Problem& problem, double resolution = 1e-2);

// Same search with an arbitrary penalty function in place of the
// regularizer's phi.
OracleResult brute_force_primal_phi(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                    const CostMatrix& cost, double eps,
                                    const std::function<double(double)>& phi,
                                    double resolution = 1e-2);

}  // namespace phiot
