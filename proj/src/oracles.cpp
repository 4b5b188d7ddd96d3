#include "phiot/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace phiot {

OracleResult exact_ot_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
    if (mu.dim() != 1 || nu.dim() != 1)
        throw DimensionError("exact_ot_1d requires 1-D supports");
    if (p < 1.0) throw InvalidParameter("exact_ot_1d requires p >= 1");

    std::vector<Index> oi(mu.size()), oj(nu.size());
    std::iota(oi.begin(), oi.end(), 0);
    std::iota(oj.begin(), oj.end(), 0);
    std::sort(oi.begin(), oi.end(),
              [&](Index a, Index b) { return mu.points(a, 0) < mu.points(b, 0); });
    std::sort(oj.begin(), oj.end(),
              [&](Index a, Index b) { return nu.points(a, 0) < nu.points(b, 0); });

    OracleResult out;
    out.argmin = Matrix::Zero(mu.size(), nu.size());
    Vector rem_mu = mu.weights, rem_nu = nu.weights;
    std::size_t i = 0, j = 0;
    while (i < oi.size() && j < oj.size()) {
        const Index a = oi[i], b = oj[j];
        const double m = std::min(rem_mu[a], rem_nu[b]);
        out.argmin(a, b) += m;
        out.value += m * std::pow(std::abs(mu.points(a, 0) - nu.points(b, 0)), p);
        rem_mu[a] -= m;
        rem_nu[b] -= m;
        if (rem_mu[a] <= 1e-16) ++i;
        if (rem_nu[b] <= 1e-16) ++j;
    }
    return out;
}

namespace {

// Entries below the free block are implied by the marginals; negative
// implied mass marks the grid point infeasible.
struct PolytopeSearch {
    const DiscreteMeasure& mu;
    const DiscreteMeasure& nu;
    const CostMatrix& cost;
    double eps;
    const std::function<double(double)>& phi;

    Index I, J, fr, fc;

    bool complete(const Vector& free_vals, Matrix& gamma) const {
        for (Index i = 0; i < fr; ++i)
            for (Index j = 0; j < fc; ++j) gamma(i, j) = free_vals[i * fc + j];
        for (Index i = 0; i < fr; ++i) {
            double rest = mu.weights[i] - gamma.row(i).head(fc).sum();
            if (rest < -1e-12) return false;
            gamma(i, J - 1) = std::max(rest, 0.0);
        }
        for (Index j = 0; j < fc; ++j) {
            double rest = nu.weights[j] - gamma.col(j).head(fr).sum();
            if (rest < -1e-12) return false;
            gamma(I - 1, j) = std::max(rest, 0.0);
        }
        double corner = nu.weights[J - 1] - gamma.col(J - 1).head(fr).sum();
        if (corner < -1e-12) return false;
        gamma(I - 1, J - 1) = std::max(corner, 0.0);
        return true;
    }

    double objective(const Matrix& gamma) const {
        double val = 0.0;
        for (Index j = 0; j < J; ++j)
            for (Index i = 0; i < I; ++i) {
                const double prod = mu.weights[i] * nu.weights[j];
                val += cost.entries(i, j) * gamma(i, j) + eps * phi(gamma(i, j) / prod) * prod;
            }
        return val;
    }
};

}  // namespace

OracleResult brute_force_primal_phi(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                    const CostMatrix& cost, double eps,
                                    const std::function<double(double)>& phi,
                                    double resolution) {
    if (cost.rows() != mu.size() || cost.cols() != nu.size())
        throw DimensionMismatch("cost shape does not match marginals");
    if (eps <= 0.0) throw InvalidParameter("eps must be positive");
    if (resolution <= 0.0) throw InvalidParameter("resolution must be positive");

    const Index I = mu.size(), J = nu.size();
    const Index dim = (I - 1) * (J - 1);
    if (dim > 4)
        throw OracleTooLarge("polytope dimension " + std::to_string(dim) +
                             " exceeds the supported maximum of 4");

    PolytopeSearch search{mu, nu, cost, eps, phi, I, J, I - 1, J - 1};

    if (dim == 0) {
        // single-row or single-column polytope: the coupling is unique
        Matrix unique_gamma = Matrix::Zero(I, J);
        if (!search.complete(Vector(0), unique_gamma))
            throw Error("degenerate polytope is infeasible");
        OracleResult out;
        out.resolution = resolution;
        out.value = search.objective(unique_gamma);
        out.argmin = unique_gamma;
        return out;
    }

    // feasible box per free entry
    Vector box_hi(dim);
    for (Index i = 0; i < I - 1; ++i)
        for (Index j = 0; j < J - 1; ++j)
            box_hi[i * (J - 1) + j] = std::min(mu.weights[i], nu.weights[j]);

    Vector center = 0.5 * box_hi;
    Vector half_width = 0.5 * box_hi;
    double spacing = resolution;

    Vector best = center;
    double best_val = std::numeric_limits<double>::infinity();
    Matrix gamma = Matrix::Zero(I, J);

    for (int round = 0; round < 4; ++round) {
        // one initial scan plus three rounds of 10x local shrinkage
        std::vector<std::vector<double>> axes(dim);
        for (Index k = 0; k < dim; ++k) {
            const double lo = std::max(0.0, center[k] - half_width[k]);
            const double hi = std::min(box_hi[k], center[k] + half_width[k]);
            const int steps = std::max(1, int(std::ceil((hi - lo) / spacing)));
            axes[k].resize(steps + 1);
            for (int s = 0; s <= steps; ++s) axes[k][s] = lo + (hi - lo) * s / steps;
        }

        std::vector<std::size_t> idx(dim, 0);
        Vector point(dim);
        bool done = false;
        while (!done) {
            for (Index k = 0; k < dim; ++k) point[k] = axes[k][idx[k]];
            if (search.complete(point, gamma)) {
                const double val = search.objective(gamma);
                if (val < best_val) {  // strict: lexicographically first wins ties
                    best_val = val;
                    best = point;
                }
            }
            Index k = dim - 1;
            while (true) {
                if (++idx[k] <= axes[k].size() - 1) break;
                idx[k] = 0;
                if (k == 0) { done = true; break; }
                --k;
            }
        }

        center = best;
        half_width.setConstant(2.0 * spacing);
        spacing /= 10.0;
    }

    OracleResult out;
    out.resolution = resolution;
    out.value = best_val;
    if (!search.complete(best, gamma))
        throw Error("oracle lost feasibility at its own argmin");
    out.argmin = gamma;
    return out;
}

OracleResult brute_force_primal(const Problem& pb, double resolution) {
    pb.validate();
    const auto phi = [&pb](double z) { return pb.reg.phi(z); };
    return brute_force_primal_phi(pb.mu, pb.nu, pb.cost, pb.eps, phi, resolution);
}

}  // namespace phiot
