#pragma once

#include <utility>
#include <vector>

#include "phiot/measures.hpp"
#include "phiot/regularizers.hpp"
#include "phiot/transforms.hpp"

namespace phiot {

// A two-marginal convex-regularized transport instance.
struct Problem {
    DiscreteMeasure mu;
    DiscreteMeasure nu;
    CostMatrix cost;
    double eps = 1.0;
    Regularizer reg = Regularizer::shannon();

    void validate() const;
};

struct Potentials {
    Vector u;
    Vector v;
};

// Plan density alpha_ij = d gamma / d(mu x nu) and the cell masses
// gamma_ij = alpha_ij mu_i nu_j.
struct Coupling {
    Matrix alpha;
    Matrix masses;
};

enum class StopReason { Tolerance, MaxIter };

struct SolveReport {
    int iterations = 0;
    std::vector<double> dual_values;                      // one per sweep, nondecreasing
    std::vector<std::pair<double, double>> marginal_errors;  // (mu side, nu side) L1
    std::vector<double> shifts;                           // applied translation per sweep
    bool converged = false;
    StopReason stop_reason = StopReason::MaxIter;
};

struct SolverConfig {
    double marginal_tol = 1e-8;  // L1, both marginals
    int max_iter = 10000;
    RootConfig root;
    bool store_plan = false;
    Index tensor_size_cap = 10'000'000;  // multi-marginal dense-tensor cap
};

// Generalized IPFP: alternates u <- transform(v), v <- transform(u) from
// v = 0, applying the symmetric translation a = (nu.v - mu.u)/2 after each
// sweep so that converged potentials satisfy mu.u = nu.v. Stops when both
// plan marginal L1 errors fall below marginal_tol.
std::pair<Potentials, SolveReport> solve(const Problem& problem, const SolverConfig& cfg = {});

// gamma = psi'((u_i + v_j - c_ij)/eps) mu_i nu_j, valid for any potentials.
Coupling recover_plan(const Potentials& pot, const Problem& problem);

// L1 distances of the coupling's marginals from (mu, nu).
std::pair<double, double> marginal_errors(const Coupling& coupling, const Problem& problem);

struct SlacknessReport {
    bool feasible = false;                         // all three conditions within tol
    double duality_gap = 0.0;                      // |primal - dual| at the given pair
    std::pair<double, double> marginal_err;        // condition (a)
    std::pair<double, double> transform_residuals; // condition (b), max norm, shared
                                                   // translation removed
};

// Numerically checks the equivalent optimality conditions: plan
// feasibility, fixed-point property of both transforms, and vanishing
// duality gap. Diagnostic only, never throws on failure.
SlacknessReport check_slackness(const Potentials& pot, const Problem& problem, double tol);

}  // namespace phiot
