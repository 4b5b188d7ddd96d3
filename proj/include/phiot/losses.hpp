#pragma once

#include <functional>
#include <string>
#include <vector>

#include "phiot/sinkhorn.hpp"

namespace phiot {

// G = sum_ij phi(alpha_ij) mu_i nu_j, the penalty term of the primal.
double phi_entropy(const Matrix& alpha, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   const Regularizer& reg);

// D(u, v) = mu.u + nu.v - eps sum_ij psi((u_i + v_j - c_ij)/eps) mu_i nu_j.
double dual_value(const Potentials& pot, const Problem& problem);

// C(gamma) = sum_ij c_ij gamma_ij + eps G(alpha).
double primal_value(const Coupling& coupling, const Problem& problem);

struct LossReport {
    double value = 0.0;        // the transport loss, taken as the dual value
    double dual_value = 0.0;
    double primal_value = 0.0;
    double gap = 0.0;          // |primal - dual|
    Potentials potentials;
    SolveReport report;        // report.converged doubles as the warning flag
};

LossReport ot_loss(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostMatrix& cost,
                   double eps, const Regularizer& reg, const SolverConfig& cfg = {});

using CostBuilder = std::function<CostMatrix(const DiscreteMeasure&, const DiscreteMeasure&)>;

CostBuilder metric_cost_builder(CostKind kind, double p = 2.0);

// Debiased loss OT(mu,nu) - (OT(mu,mu) + OT(nu,nu))/2, the three terms
// solved independently on their own support pairs. The sign is reported
// as-is; nonnegativity is not asserted.
double divergence(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  const CostBuilder& cost_builder, double eps, const Regularizer& reg,
                  const SolverConfig& cfg = {});

// First variation with respect to the marginal weights, recentered to
// weighted mean zero per marginal (the loss lives on the simplex, so the
// gradient is defined against zero-sum perturbations only).
struct GradientPair {
    Vector g_mu;
    Vector g_nu;
};

GradientPair gradient(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const CostMatrix& cost, double eps, const Regularizer& reg,
                      const SolverConfig& cfg = {});

struct LimitProbeRow {
    double eps = 0.0;
    double ot_loss = 0.0;
    double divergence = 0.0;
    double plan_product_l1 = 0.0;  // L1 distance of the plan from mu x nu
    Index support_size = 0;        // strictly positive plan densities
    bool converged = false;        // the (mu, nu) solve at this eps; not in the CSV
};

// One solve battery per eps; rows keep the input order. Non-converged rows
// are still reported.
std::vector<LimitProbeRow> limit_probe(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       const CostBuilder& cost_builder, const Regularizer& reg,
                                       const std::vector<double>& eps_list,
                                       const SolverConfig& cfg = {});

// CSV with header "eps,ot_loss,divergence,plan_product_l1,support_size".
std::string limit_probe_csv(const std::vector<LimitProbeRow>& rows);

}  // namespace phiot
