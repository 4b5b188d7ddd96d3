#include "phiot/sinkhorn.hpp"

#include <cmath>

#include "phiot/losses.hpp"

namespace phiot {

namespace {

// Marginal L1 errors of the plan induced by (u, v) without materializing it.
std::pair<double, double> plan_marginal_errors(const Vector& u, const Vector& v,
                                               const Problem& pb) {
    const Index n = pb.mu.size(), m = pb.nu.size();
    Vector row_sum = Vector::Zero(n);
    Vector col_sum = Vector::Zero(m);
    const double inv_eps = 1.0 / pb.eps;
    for (Index j = 0; j < m; ++j) {
        double cs = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double mass = pb.reg.psi_prime((u[i] + v[j] - pb.cost.entries(i, j)) * inv_eps) *
                                pb.mu.weights[i] * pb.nu.weights[j];
            row_sum[i] += mass;
            cs += mass;
        }
        col_sum[j] = cs;
    }
    return {(row_sum - pb.mu.weights).lpNorm<1>(), (col_sum - pb.nu.weights).lpNorm<1>()};
}

}  // namespace

void Problem::validate() const {
    if (cost.rows() != mu.size() || cost.cols() != nu.size())
        throw DimensionMismatch("cost shape does not match marginal supports");
    if (eps <= 0.0) throw InvalidParameter("eps must be positive");
}

std::pair<Potentials, SolveReport> solve(const Problem& pb, const SolverConfig& cfg) {
    pb.validate();
    if (cfg.marginal_tol <= 0.0) throw InvalidParameter("marginal_tol must be positive");
    if (cfg.max_iter < 1) throw InvalidParameter("max_iter must be at least 1");

    CostMatrix cost_t;
    cost_t.entries = pb.cost.entries.transpose();
    cost_t.sup_norm = pb.cost.sup_norm;

    Potentials pot{Vector::Zero(pb.mu.size()), Vector::Zero(pb.nu.size())};
    SolveReport rep;
    rep.dual_values.reserve(64);

    for (int it = 0; it < cfg.max_iter; ++it) {
        try {
            // u-update matches the mu marginal, v-update the nu marginal
            pot.u = cep_transform(pot.v, cost_t, pb.eps, pb.reg, pb.nu,
                                  TransformDirection::RowsToCols, cfg.root);
            pot.v = cep_transform(pot.u, pb.cost, pb.eps, pb.reg, pb.mu,
                                  TransformDirection::RowsToCols, cfg.root);
        } catch (const RootSolveFailure& e) {
            throw RootSolveFailure(std::string(e.what()) + " at sweep " + std::to_string(it),
                                   e.last_residual, e.atom_index, it);
        }

        const double shift = 0.5 * (pb.nu.weights.dot(pot.v) - pb.mu.weights.dot(pot.u));
        pot.u.array() += shift;
        pot.v.array() -= shift;
        rep.shifts.push_back(shift);
        rep.dual_values.push_back(dual_value(pot, pb));

        const auto errs = plan_marginal_errors(pot.u, pot.v, pb);
        rep.marginal_errors.push_back(errs);
        rep.iterations = it + 1;
        if (errs.first <= cfg.marginal_tol && errs.second <= cfg.marginal_tol) {
            rep.converged = true;
            rep.stop_reason = StopReason::Tolerance;
            break;
        }
    }
    if (!rep.converged) rep.stop_reason = StopReason::MaxIter;
    return {std::move(pot), std::move(rep)};
}

Coupling recover_plan(const Potentials& pot, const Problem& pb) {
    pb.validate();
    if (pot.u.size() != pb.mu.size() || pot.v.size() != pb.nu.size())
        throw DimensionMismatch("potentials do not match marginal supports");
    const Index n = pb.mu.size(), m = pb.nu.size();
    Coupling cp;
    cp.alpha.resize(n, m);
    cp.masses.resize(n, m);
    const double inv_eps = 1.0 / pb.eps;
    for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i < n; ++i) {
            const double a =
                pb.reg.psi_prime((pot.u[i] + pot.v[j] - pb.cost.entries(i, j)) * inv_eps);
            cp.alpha(i, j) = a;
            cp.masses(i, j) = a * pb.mu.weights[i] * pb.nu.weights[j];
        }
    }
    return cp;
}

std::pair<double, double> marginal_errors(const Coupling& cp, const Problem& pb) {
    if (cp.masses.rows() != pb.mu.size() || cp.masses.cols() != pb.nu.size())
        throw DimensionMismatch("coupling shape does not match marginals");
    const double e1 = (cp.masses.rowwise().sum() - pb.mu.weights).lpNorm<1>();
    const double e2 = (cp.masses.colwise().sum().transpose() - pb.nu.weights).lpNorm<1>();
    return {e1, e2};
}

SlacknessReport check_slackness(const Potentials& pot, const Problem& pb, double tol) {
    SlacknessReport out;

    const Coupling cp = recover_plan(pot, pb);
    out.marginal_err = marginal_errors(cp, pb);

    CostMatrix cost_t;
    cost_t.entries = pb.cost.entries.transpose();
    cost_t.sup_norm = pb.cost.sup_norm;
    const Vector best_u = cep_transform(pot.v, cost_t, pb.eps, pb.reg, pb.nu,
                                        TransformDirection::RowsToCols);
    const Vector best_v = cep_transform(pot.u, pb.cost, pb.eps, pb.reg, pb.mu,
                                        TransformDirection::RowsToCols);
    // a pair optimal up to the gauge (u+a, v) leaves the same constant in
    // both residuals; remove it before taking norms
    const Vector ru = pot.u - best_u;
    const Vector rv = pot.v - best_v;
    const double shared = 0.5 * (pb.mu.weights.dot(ru) + pb.nu.weights.dot(rv));
    out.transform_residuals = {(ru.array() - shared).abs().maxCoeff(),
                               (rv.array() - shared).abs().maxCoeff()};

    out.duality_gap = std::abs(primal_value(cp, pb) - dual_value(pot, pb));

    out.feasible = out.marginal_err.first <= tol && out.marginal_err.second <= tol &&
                   out.transform_residuals.first <= tol &&
                   out.transform_residuals.second <= tol && out.duality_gap <= tol;
    return out;
}

}  // namespace phiot
