#pragma once

#include "phiot/measures.hpp"
#include "phiot/regularizers.hpp"

namespace phiot {

struct RootConfig {
    double tol = 1e-12;  // residual tolerance on |beta(t) - 1|
    int max_iter = 100;
};

// Which side of the cost matrix the input potential lives on.
enum class TransformDirection { RowsToCols, ColsToRows };

// Solves the scalar marginal-matching equation
//     beta(t) = sum_i w_i psi'((u_i + t - c_i) / eps) = 1
// by safeguarded Newton with bisection fallback. beta is nondecreasing and
// psi'(0) = 1 pins the root inside [-max|c| - max u - 1, max|c| - min u + 1];
// the bracket doubles outward up to five times if rounding spoils the signs.
double solve_matching_equation(const Vector& u, const Vector& cost_col, double eps,
                               const Regularizer& reg, const Vector& weights,
                               const RootConfig& cfg = {});

// The (c,eps,Phi)-transform of a potential on the source side: one
// matching-equation solve per target atom. `source` is the measure the
// input potential lives on. Dispatches to the log-domain SoftMin closed
// form for the Shannon entropy.
Vector cep_transform(const Vector& u, const CostMatrix& cost, double eps,
                     const Regularizer& reg, const DiscreteMeasure& source,
                     TransformDirection dir, const RootConfig& cfg = {});

// Same transform forced through the generic root solver (any regularizer).
Vector cep_transform_rootsolve(const Vector& u, const CostMatrix& cost, double eps,
                               const Regularizer& reg, const DiscreteMeasure& source,
                               TransformDirection dir, const RootConfig& cfg = {});

// Shannon closed form, max-shifted for stability:
//     out_k = -eps log sum_i w_i exp((u_i - c_{ik}) / eps).
Vector softmin_transform(const Vector& u, const CostMatrix& cost, double eps,
                         const DiscreteMeasure& source, TransformDirection dir);

}  // namespace phiot
