#pragma once

#include <vector>

#include "phiot/sinkhorn.hpp"

namespace phiot {

// Dense cost tensor, row-major flattening with the last index fastest.
struct CostTensor {
    std::vector<Index> dims;
    Vector values;
    double sup_norm = 0.0;

    Index size() const { return values.size(); }
    Index order() const { return Index(dims.size()); }
};

CostTensor make_cost_tensor(std::vector<Index> dims, Vector values);

// N-marginal convex-regularized transport instance.
struct MMProblem {
    std::vector<DiscreteMeasure> marginals;
    CostTensor cost;
    double eps = 1.0;
    Regularizer reg = Regularizer::shannon();

    Index order() const { return Index(marginals.size()); }
    void validate() const;
};

// One potential per marginal. After a solve the means of u_2..u_N under
// their marginals are zero; the compensating translation sits in u_1.
struct MMPotentials {
    std::vector<Vector> u;
};

struct MMCoupling {
    std::vector<Index> dims;
    Vector alpha;   // plan density w.r.t. the product measure, flat
    Vector masses;  // alpha times the product weights, flat
};

struct MMSolveReport {
    int iterations = 0;
    std::vector<double> dual_values;
    std::vector<Vector> marginal_errors;  // per sweep: one L1 error per marginal
    std::vector<Vector> shifts;           // per sweep: zero-sum translation per coordinate
    bool converged = false;
    StopReason stop_reason = StopReason::MaxIter;
};

// Per-coordinate transform: for each atom of marginal `coord`, solves the
// matching equation over the product of the remaining supports. Reduces to
// the two-marginal transform with the flattened product as source side.
Vector mm_transform(const MMPotentials& pot, Index coord, const MMProblem& problem,
                    const RootConfig& cfg = {});

// Gauss-Seidel sweeps over coordinates 1..N; stops when every marginal L1
// error of the recovered plan is below cfg.marginal_tol. Tensors larger
// than cfg.tensor_size_cap raise SizeCapExceeded.
std::pair<MMPotentials, MMSolveReport> mm_solve(const MMProblem& problem,
                                                const SolverConfig& cfg = {});

double mm_dual_value(const MMPotentials& pot, const MMProblem& problem);
double mm_primal_value(const MMCoupling& coupling, const MMProblem& problem);

MMCoupling mm_recover_plan(const MMPotentials& pot, const MMProblem& problem);

// L1 distance of each tensor marginal from its target, length N.
Vector mm_marginal_errors(const MMCoupling& coupling, const MMProblem& problem);

// Barycenter-type cost: entry = sum_{i<j} w_i w_j |x_i - x_j|^2 over the
// support product. `weights` are simplex weights over the coordinates.
CostTensor build_barycenter_cost(const std::vector<DiscreteMeasure>& marginals,
                                 const Vector& weights);

// Pushforward of the coupling under the weighted-mean map: one atom at
// sum_i w_i x_i per tensor cell above mass_floor, masses accumulated over
// mean points that coincide within 1e-9 per coordinate.
DiscreteMeasure barycenter_extract(const MMCoupling& coupling,
                                   const std::vector<DiscreteMeasure>& marginals,
                                   const Vector& weights, double mass_floor = 1e-12);

}  // namespace phiot
