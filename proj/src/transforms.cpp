#include "phiot/transforms.hpp"

#include <cmath>
#include <limits>

#include "phiot/detail/parallel.hpp"

namespace phiot {

namespace {

// beta and its derivative use a fixed left-to-right summation so that a
// per-atom solve yields the same bits no matter how atoms are scheduled.
double beta_eval(const Vector& u, const Vector& c, const Vector& w, double inv_eps,
                 const Regularizer& reg, double t) {
    double s = 0.0;
    for (Index i = 0; i < u.size(); ++i)
        s += w[i] * reg.psi_prime((u[i] + t - c[i]) * inv_eps);
    return s;
}

double beta_prime_eval(const Vector& u, const Vector& c, const Vector& w, double inv_eps,
                       const Regularizer& reg, double t) {
    double s = 0.0;
    for (Index i = 0; i < u.size(); ++i)
        s += w[i] * reg.psi_second((u[i] + t - c[i]) * inv_eps);
    return s * inv_eps;
}

void check_transform_args(const Vector& u, const CostMatrix& cost, double eps,
                          const DiscreteMeasure& source, TransformDirection dir) {
    if (eps <= 0.0) throw InvalidParameter("eps must be positive");
    const Index src = dir == TransformDirection::RowsToCols ? cost.rows() : cost.cols();
    if (u.size() != src || source.size() != src)
        throw DimensionMismatch("potential/cost/source size mismatch in transform");
}

}  // namespace

double solve_matching_equation(const Vector& u, const Vector& cost_col, double eps,
                               const Regularizer& reg, const Vector& weights,
                               const RootConfig& cfg) {
    if (eps <= 0.0) throw InvalidParameter("eps must be positive");
    if (cfg.tol <= 0.0 || cfg.max_iter < 1)
        throw InvalidParameter("root config needs tol > 0 and max_iter >= 1");
    if (u.size() != cost_col.size() || u.size() != weights.size())
        throw DimensionMismatch("matching equation: vector length mismatch");
    if (u.size() == 0) throw DimensionMismatch("matching equation: empty vectors");

    const double inv_eps = 1.0 / eps;
    const double cmax = cost_col.cwiseAbs().maxCoeff();
    double lo = -cmax - u.maxCoeff() - 1.0;
    double hi = cmax - u.minCoeff() + 1.0;

    double g_lo = beta_eval(u, cost_col, weights, inv_eps, reg, lo) - 1.0;
    double g_hi = beta_eval(u, cost_col, weights, inv_eps, reg, hi) - 1.0;
    for (int widen = 0; g_lo > 0.0 || g_hi < 0.0; ++widen) {
        if (widen >= 5)
            throw RootSolveFailure("matching equation: no sign change in bracket",
                                   std::max(std::abs(g_lo), std::abs(g_hi)));
        const double width = hi - lo;
        if (g_lo > 0.0) {
            lo -= width;
            g_lo = beta_eval(u, cost_col, weights, inv_eps, reg, lo) - 1.0;
        }
        if (g_hi < 0.0) {
            hi += width;
            g_hi = beta_eval(u, cost_col, weights, inv_eps, reg, hi) - 1.0;
        }
    }

    double t = 0.5 * (lo + hi);
    double g = 0.0;
    for (int it = 0; it < cfg.max_iter; ++it) {
        g = beta_eval(u, cost_col, weights, inv_eps, reg, t) - 1.0;
        if (std::abs(g) <= cfg.tol) return t;
        if (g > 0.0)
            hi = t;
        else
            lo = t;
        const double gp = beta_prime_eval(u, cost_col, weights, inv_eps, reg, t);
        double next = t - g / gp;
        // beta can be flat left of the positive-part threshold; fall back to
        // bisection whenever Newton stalls or leaves the bracket
        if (!(gp >= 1e-300) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
        t = next;
    }
    throw RootSolveFailure("matching equation: no convergence in " +
                               std::to_string(cfg.max_iter) + " iterations",
                           std::abs(g));
}

Vector cep_transform_rootsolve(const Vector& u, const CostMatrix& cost, double eps,
                               const Regularizer& reg, const DiscreteMeasure& source,
                               TransformDirection dir, const RootConfig& cfg) {
    check_transform_args(u, cost, eps, source, dir);
    if (dir == TransformDirection::ColsToRows) {
        CostMatrix t;
        t.entries = cost.entries.transpose();
        t.sup_norm = cost.sup_norm;
        return cep_transform_rootsolve(u, t, eps, reg, source, TransformDirection::RowsToCols, cfg);
    }
    const Index m = cost.cols();
    Vector out(m);
    detail::parallel_for(m, [&](Index k) {
        try {
            out[k] = solve_matching_equation(u, cost.entries.col(k), eps, reg,
                                             source.weights, cfg);
        } catch (const RootSolveFailure& e) {
            throw RootSolveFailure(std::string(e.what()) + " (target atom " +
                                       std::to_string(k) + ")",
                                   e.last_residual, k);
        }
    });
    return out;
}

Vector softmin_transform(const Vector& u, const CostMatrix& cost, double eps,
                         const DiscreteMeasure& source, TransformDirection dir) {
    if (eps <= 0.0) throw InvalidParameter("eps must be positive");
    if (dir == TransformDirection::ColsToRows) {
        CostMatrix t;
        t.entries = cost.entries.transpose();
        t.sup_norm = cost.sup_norm;
        return softmin_transform(u, t, eps, source, TransformDirection::RowsToCols);
    }
    if (u.size() != cost.rows() || source.size() != cost.rows())
        throw DimensionMismatch("potential/cost/source size mismatch in transform");

    const Vector log_w = source.weights.array().log();
    const Index n = cost.rows(), m = cost.cols();
    Vector out(m);
    detail::parallel_for(m, [&](Index k) {
        double top = -std::numeric_limits<double>::infinity();
        for (Index i = 0; i < n; ++i)
            top = std::max(top, (u[i] - cost.entries(i, k)) / eps + log_w[i]);
        double acc = 0.0;
        for (Index i = 0; i < n; ++i)
            acc += std::exp((u[i] - cost.entries(i, k)) / eps + log_w[i] - top);
        out[k] = -eps * (top + std::log(acc));
    });
    return out;
}

Vector cep_transform(const Vector& u, const CostMatrix& cost, double eps,
                     const Regularizer& reg, const DiscreteMeasure& source,
                     TransformDirection dir, const RootConfig& cfg) {
    if (reg.has_closed_transform()) return softmin_transform(u, cost, eps, source, dir);
    return cep_transform_rootsolve(u, cost, eps, reg, source, dir, cfg);
}

}  // namespace phiot
