#include "phiot/losses.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace phiot {

double phi_entropy(const Matrix& alpha, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   const Regularizer& reg) {
    if (alpha.rows() != mu.size() || alpha.cols() != nu.size())
        throw DimensionMismatch("density shape does not match marginals");
    if ((alpha.array() < 0.0).any()) throw DomainError("plan density must be nonnegative");
    double g = 0.0;
    for (Index j = 0; j < alpha.cols(); ++j)
        for (Index i = 0; i < alpha.rows(); ++i)
            g += reg.phi(alpha(i, j)) * mu.weights[i] * nu.weights[j];
    return g;
}

double dual_value(const Potentials& pot, const Problem& pb) {
    double s = 0.0;
    const double inv_eps = 1.0 / pb.eps;
    for (Index j = 0; j < pb.nu.size(); ++j)
        for (Index i = 0; i < pb.mu.size(); ++i)
            s += pb.reg.psi((pot.u[i] + pot.v[j] - pb.cost.entries(i, j)) * inv_eps) *
                 pb.mu.weights[i] * pb.nu.weights[j];
    return pb.mu.weights.dot(pot.u) + pb.nu.weights.dot(pot.v) - pb.eps * s;
}

double primal_value(const Coupling& cp, const Problem& pb) {
    const double transport = (pb.cost.entries.array() * cp.masses.array()).sum();
    return transport + pb.eps * phi_entropy(cp.alpha, pb.mu, pb.nu, pb.reg);
}

LossReport ot_loss(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostMatrix& cost,
                   double eps, const Regularizer& reg, const SolverConfig& cfg) {
    Problem pb{mu, nu, cost, eps, reg};
    LossReport out;
    auto [pot, rep] = solve(pb, cfg);
    out.dual_value = dual_value(pot, pb);
    out.primal_value = primal_value(recover_plan(pot, pb), pb);
    out.gap = std::abs(out.primal_value - out.dual_value);
    out.value = out.dual_value;
    out.potentials = std::move(pot);
    out.report = std::move(rep);
    return out;
}

CostBuilder metric_cost_builder(CostKind kind, double p) {
    if (kind == CostKind::PNorm && p < 1.0)
        throw InvalidParameter("pnorm exponent must satisfy p >= 1");
    return [kind, p](const DiscreteMeasure& a, const DiscreteMeasure& b) {
        return build_cost(a, b, kind, p);
    };
}

double divergence(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  const CostBuilder& cost_builder, double eps, const Regularizer& reg,
                  const SolverConfig& cfg) {
    // three independent solves, each with fresh potentials
    const double xy = ot_loss(mu, nu, cost_builder(mu, nu), eps, reg, cfg).value;
    const double xx = ot_loss(mu, mu, cost_builder(mu, mu), eps, reg, cfg).value;
    const double yy = ot_loss(nu, nu, cost_builder(nu, nu), eps, reg, cfg).value;
    return xy - 0.5 * (xx + yy);
}

GradientPair gradient(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const CostMatrix& cost, double eps, const Regularizer& reg,
                      const SolverConfig& cfg) {
    Problem pb{mu, nu, cost, eps, reg};
    auto [pot, rep] = solve(pb, cfg);
    (void)rep;

    GradientPair g;
    g.g_mu = pot.u;
    g.g_nu = pot.v;
    const double inv_eps = 1.0 / eps;
    for (Index j = 0; j < nu.size(); ++j) {
        for (Index i = 0; i < mu.size(); ++i) {
            const double psi_val = reg.psi((pot.u[i] + pot.v[j] - cost.entries(i, j)) * inv_eps);
            g.g_mu[i] -= eps * psi_val * nu.weights[j];
            g.g_nu[j] -= eps * psi_val * mu.weights[i];
        }
    }
    g.g_mu.array() -= mu.weights.dot(g.g_mu);
    g.g_nu.array() -= nu.weights.dot(g.g_nu);
    return g;
}

std::vector<LimitProbeRow> limit_probe(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       const CostBuilder& cost_builder, const Regularizer& reg,
                                       const std::vector<double>& eps_list,
                                       const SolverConfig& cfg) {
    for (double e : eps_list)
        if (e <= 0.0) throw InvalidParameter("eps ladder entries must be positive");

    const CostMatrix cost = cost_builder(mu, nu);
    std::vector<LimitProbeRow> rows;
    rows.reserve(eps_list.size());
    for (double eps : eps_list) {
        LimitProbeRow row;
        row.eps = eps;
        const LossReport loss = ot_loss(mu, nu, cost, eps, reg, cfg);
        row.ot_loss = loss.value;
        row.converged = loss.report.converged;
        row.divergence = divergence(mu, nu, cost_builder, eps, reg, cfg);

        const Problem pb{mu, nu, cost, eps, reg};
        const Coupling cp = recover_plan(loss.potentials, pb);
        const Matrix product = mu.weights * nu.weights.transpose();
        row.plan_product_l1 = (cp.masses - product).cwiseAbs().sum();
        row.support_size = (cp.alpha.array() > 0.0).count();
        rows.push_back(row);
    }
    return rows;
}

std::string limit_probe_csv(const std::vector<LimitProbeRow>& rows) {
    std::ostringstream out;
    out << "eps,ot_loss,divergence,plan_product_l1,support_size\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%lld\n", r.eps, r.ot_loss,
                      r.divergence, r.plan_product_l1, static_cast<long long>(r.support_size));
        out << buf;
    }
    return out.str();
}

}  // namespace phiot
