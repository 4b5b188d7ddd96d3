#include "phiot/multimarginal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace phiot {

namespace {

std::vector<Index> tensor_strides(const std::vector<Index>& dims) {
    std::vector<Index> strides(dims.size());
    Index s = 1;
    for (Index k = Index(dims.size()) - 1; k >= 0; --k) {
        strides[std::size_t(k)] = s;
        s *= dims[std::size_t(k)];
    }
    return strides;
}

// Flat offsets of all cells with coordinate `coord` pinned to index 0,
// enumerated in row-major order of the remaining coordinates, together
// with the summed potential and product weight of each such slice cell.
struct ReducedSlice {
    std::vector<Index> offsets;
    Vector sum_u;
    Vector weights;
};

ReducedSlice reduce_over_others(const MMProblem& pb, const MMPotentials& pot, Index coord) {
    const Index n = pb.order();
    const auto strides = tensor_strides(pb.cost.dims);

    Index red_size = 1;
    for (Index j = 0; j < n; ++j)
        if (j != coord) red_size *= pb.cost.dims[std::size_t(j)];

    ReducedSlice out;
    out.offsets.resize(std::size_t(red_size));
    out.sum_u.resize(red_size);
    out.weights.resize(red_size);

    std::vector<Index> idx(std::size_t(n), 0);
    for (Index r = 0; r < red_size; ++r) {
        Index off = 0;
        double su = 0.0, pw = 1.0;
        for (Index j = 0; j < n; ++j) {
            if (j == coord) continue;
            off += idx[std::size_t(j)] * strides[std::size_t(j)];
            su += pot.u[std::size_t(j)][idx[std::size_t(j)]];
            pw *= pb.marginals[std::size_t(j)].weights[idx[std::size_t(j)]];
        }
        out.offsets[std::size_t(r)] = off;
        out.sum_u[r] = su;
        out.weights[r] = pw;
        // odometer over coordinates != coord, last fastest
        for (Index j = n - 1; j >= 0; --j) {
            if (j == coord) continue;
            if (++idx[std::size_t(j)] < pb.cost.dims[std::size_t(j)]) break;
            idx[std::size_t(j)] = 0;
        }
    }
    return out;
}

}  // namespace

CostTensor make_cost_tensor(std::vector<Index> dims, Vector values) {
    if (dims.size() < 2) throw InvalidParameter("cost tensor needs at least two coordinates");
    Index total = 1;
    for (Index d : dims) {
        if (d <= 0) throw InvalidCost("cost tensor dimension must be positive");
        total *= d;
    }
    if (values.size() != total) throw InvalidCost("cost tensor value count does not match shape");
    if (!values.allFinite()) throw InvalidCost("non-finite cost tensor entry");
    CostTensor t;
    t.sup_norm = values.cwiseAbs().maxCoeff();
    t.dims = std::move(dims);
    t.values = std::move(values);
    return t;
}

void MMProblem::validate() const {
    if (marginals.size() < 2) throw InvalidParameter("need at least two marginals");
    if (cost.dims.size() != marginals.size())
        throw DimensionMismatch("cost tensor order does not match marginal count");
    for (std::size_t j = 0; j < marginals.size(); ++j)
        if (cost.dims[j] != marginals[j].size())
            throw DimensionMismatch("cost tensor dimension " + std::to_string(j) +
                                    " does not match marginal support");
    if (eps <= 0.0) throw InvalidParameter("eps must be positive");
}

Vector mm_transform(const MMPotentials& pot, Index coord, const MMProblem& pb,
                    const RootConfig& cfg) {
    pb.validate();
    if (coord < 0 || coord >= pb.order()) throw InvalidParameter("coordinate out of range");
    if (Index(pot.u.size()) != pb.order())
        throw DimensionMismatch("potential count does not match marginal count");

    const auto strides = tensor_strides(pb.cost.dims);
    const Index stride_c = strides[std::size_t(coord)];
    const Index n_c = pb.cost.dims[std::size_t(coord)];
    const ReducedSlice red = reduce_over_others(pb, pot, coord);

    Vector out(n_c);
    const Index red_size = red.sum_u.size();
    Vector col(red_size);
    for (Index k = 0; k < n_c; ++k) {
        for (Index r = 0; r < red_size; ++r)
            col[r] = pb.cost.values[red.offsets[std::size_t(r)] + k * stride_c];
        try {
            out[k] = solve_matching_equation(red.sum_u, col, pb.eps, pb.reg, red.weights, cfg);
        } catch (const RootSolveFailure& e) {
            throw RootSolveFailure(std::string(e.what()) + " (coordinate " +
                                       std::to_string(coord) + ", atom " + std::to_string(k) + ")",
                                   e.last_residual, k);
        }
    }
    return out;
}

MMCoupling mm_recover_plan(const MMPotentials& pot, const MMProblem& pb) {
    pb.validate();
    const Index n = pb.order();
    const Index total = pb.cost.size();
    MMCoupling cp;
    cp.dims = pb.cost.dims;
    cp.alpha.resize(total);
    cp.masses.resize(total);

    std::vector<Index> idx(std::size_t(n), 0);
    const double inv_eps = 1.0 / pb.eps;
    for (Index r = 0; r < total; ++r) {
        double su = 0.0, pw = 1.0;
        for (Index j = 0; j < n; ++j) {
            su += pot.u[std::size_t(j)][idx[std::size_t(j)]];
            pw *= pb.marginals[std::size_t(j)].weights[idx[std::size_t(j)]];
        }
        const double a = pb.reg.psi_prime((su - pb.cost.values[r]) * inv_eps);
        cp.alpha[r] = a;
        cp.masses[r] = a * pw;
        for (Index j = n - 1; j >= 0; --j) {
            if (++idx[std::size_t(j)] < pb.cost.dims[std::size_t(j)]) break;
            idx[std::size_t(j)] = 0;
        }
    }
    return cp;
}

Vector mm_marginal_errors(const MMCoupling& cp, const MMProblem& pb) {
    const Index n = pb.order();
    if (cp.dims != pb.cost.dims) throw DimensionMismatch("coupling shape mismatch");
    std::vector<Vector> sums(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j)
        sums[std::size_t(j)] = Vector::Zero(pb.cost.dims[std::size_t(j)]);

    std::vector<Index> idx(std::size_t(n), 0);
    for (Index r = 0; r < cp.masses.size(); ++r) {
        for (Index j = 0; j < n; ++j) sums[std::size_t(j)][idx[std::size_t(j)]] += cp.masses[r];
        for (Index j = n - 1; j >= 0; --j) {
            if (++idx[std::size_t(j)] < pb.cost.dims[std::size_t(j)]) break;
            idx[std::size_t(j)] = 0;
        }
    }
    Vector errs(n);
    for (Index j = 0; j < n; ++j)
        errs[j] = (sums[std::size_t(j)] - pb.marginals[std::size_t(j)].weights).lpNorm<1>();
    return errs;
}

double mm_dual_value(const MMPotentials& pot, const MMProblem& pb) {
    const Index n = pb.order();
    double linear = 0.0;
    for (Index j = 0; j < n; ++j)
        linear += pb.marginals[std::size_t(j)].weights.dot(pot.u[std::size_t(j)]);

    double s = 0.0;
    std::vector<Index> idx(std::size_t(n), 0);
    const double inv_eps = 1.0 / pb.eps;
    for (Index r = 0; r < pb.cost.size(); ++r) {
        double su = 0.0, pw = 1.0;
        for (Index j = 0; j < n; ++j) {
            su += pot.u[std::size_t(j)][idx[std::size_t(j)]];
            pw *= pb.marginals[std::size_t(j)].weights[idx[std::size_t(j)]];
        }
        s += pb.reg.psi((su - pb.cost.values[r]) * inv_eps) * pw;
        for (Index j = n - 1; j >= 0; --j) {
            if (++idx[std::size_t(j)] < pb.cost.dims[std::size_t(j)]) break;
            idx[std::size_t(j)] = 0;
        }
    }
    return linear - pb.eps * s;
}

double mm_primal_value(const MMCoupling& cp, const MMProblem& pb) {
    const Index n = pb.order();
    if (cp.dims != pb.cost.dims) throw DimensionMismatch("coupling shape mismatch");
    double val = 0.0;
    std::vector<Index> idx(std::size_t(n), 0);
    for (Index r = 0; r < pb.cost.size(); ++r) {
        double pw = 1.0;
        for (Index j = 0; j < n; ++j)
            pw *= pb.marginals[std::size_t(j)].weights[idx[std::size_t(j)]];
        val += pb.cost.values[r] * cp.masses[r] + pb.eps * pb.reg.phi(cp.alpha[r]) * pw;
        for (Index j = n - 1; j >= 0; --j) {
            if (++idx[std::size_t(j)] < pb.cost.dims[std::size_t(j)]) break;
            idx[std::size_t(j)] = 0;
        }
    }
    return val;
}

std::pair<MMPotentials, MMSolveReport> mm_solve(const MMProblem& pb, const SolverConfig& cfg) {
    pb.validate();
    if (pb.cost.size() > cfg.tensor_size_cap)
        throw SizeCapExceeded("cost tensor of " + std::to_string(pb.cost.size()) +
                              " entries exceeds the cap of " +
                              std::to_string(cfg.tensor_size_cap));

    const Index n = pb.order();
    MMPotentials pot;
    pot.u.resize(std::size_t(n));
    for (Index j = 0; j < n; ++j)
        pot.u[std::size_t(j)] = Vector::Zero(pb.cost.dims[std::size_t(j)]);

    MMSolveReport rep;
    for (int it = 0; it < cfg.max_iter; ++it) {
        for (Index j = 0; j < n; ++j) {
            try {
                pot.u[std::size_t(j)] = mm_transform(pot, j, pb, cfg.root);
            } catch (const RootSolveFailure& e) {
                throw RootSolveFailure(std::string(e.what()) + " at sweep " + std::to_string(it),
                                       e.last_residual, e.atom_index, it);
            }
        }

        // zero-mean the trailing potentials, compensate in the first;
        // the recorded translation is zero-sum across coordinates
        Vector shift = Vector::Zero(n);
        for (Index j = 1; j < n; ++j) {
            const double m = pb.marginals[std::size_t(j)].weights.dot(pot.u[std::size_t(j)]);
            shift[j] = -m;
            shift[0] += m;
        }
        for (Index j = 0; j < n; ++j) pot.u[std::size_t(j)].array() += shift[j];
        rep.shifts.push_back(shift);
        rep.dual_values.push_back(mm_dual_value(pot, pb));

        const Vector errs = mm_marginal_errors(mm_recover_plan(pot, pb), pb);
        rep.marginal_errors.push_back(errs);
        rep.iterations = it + 1;
        if ((errs.array() <= cfg.marginal_tol).all()) {
            rep.converged = true;
            rep.stop_reason = StopReason::Tolerance;
            break;
        }
    }
    if (!rep.converged) rep.stop_reason = StopReason::MaxIter;
    return {std::move(pot), std::move(rep)};
}

CostTensor build_barycenter_cost(const std::vector<DiscreteMeasure>& marginals,
                                 const Vector& weights) {
    if (marginals.size() < 2) throw InvalidParameter("need at least two marginals");
    if (Index(marginals.size()) != weights.size())
        throw InvalidParameter("one barycentric weight per marginal required");
    if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9)
        throw InvalidParameter("barycentric weights must lie on the simplex");
    const Index d = marginals[0].dim();
    for (const auto& m : marginals)
        if (m.dim() != d) throw DimensionMismatch("marginals must share the ambient dimension");

    const Index n = Index(marginals.size());
    std::vector<Index> dims(static_cast<std::size_t>(n));
    Index total = 1;
    for (Index j = 0; j < n; ++j) {
        dims[std::size_t(j)] = marginals[std::size_t(j)].size();
        total *= dims[std::size_t(j)];
    }

    Vector values(total);
    std::vector<Index> idx(std::size_t(n), 0);
    for (Index r = 0; r < total; ++r) {
        double c = 0.0;
        for (Index a = 0; a < n; ++a)
            for (Index b = a + 1; b < n; ++b) {
                const auto diff = marginals[std::size_t(a)].points.row(idx[std::size_t(a)]) -
                                  marginals[std::size_t(b)].points.row(idx[std::size_t(b)]);
                c += weights[a] * weights[b] * diff.squaredNorm();
            }
        values[r] = c;
        for (Index j = n - 1; j >= 0; --j) {
            if (++idx[std::size_t(j)] < dims[std::size_t(j)]) break;
            idx[std::size_t(j)] = 0;
        }
    }
    return make_cost_tensor(std::move(dims), std::move(values));
}

DiscreteMeasure barycenter_extract(const MMCoupling& cp,
                                   const std::vector<DiscreteMeasure>& marginals,
                                   const Vector& weights, double mass_floor) {
    const Index n = Index(marginals.size());
    if (n < 2) throw InvalidParameter("need at least two marginals");
    if (weights.size() != n) throw InvalidParameter("one weight per marginal required");
    const Index d = marginals[0].dim();

    std::vector<std::pair<Vector, double>> atoms;
    std::vector<Index> idx(std::size_t(n), 0);
    for (Index r = 0; r < cp.masses.size(); ++r) {
        if (cp.masses[r] > mass_floor) {
            Vector point = Vector::Zero(d);
            for (Index j = 0; j < n; ++j)
                point += weights[j] *
                         marginals[std::size_t(j)].points.row(idx[std::size_t(j)]).transpose();
            atoms.emplace_back(std::move(point), cp.masses[r]);
        }
        for (Index j = n - 1; j >= 0; --j) {
            if (++idx[std::size_t(j)] < cp.dims[std::size_t(j)]) break;
            idx[std::size_t(j)] = 0;
        }
    }
    if (atoms.empty()) throw InvalidMeasure("coupling carries no mass above the floor");

    std::sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) {
        return std::lexicographical_compare(a.first.data(), a.first.data() + a.first.size(),
                                            b.first.data(), b.first.data() + b.first.size());
    });

    // merge mean points that coincide within 1e-9 per coordinate; the first
    // (lexicographically smallest) point of a run is the representative
    std::vector<std::pair<Vector, double>> merged;
    for (auto& [pt, mass] : atoms) {
        if (!merged.empty() &&
            (pt - merged.back().first).cwiseAbs().maxCoeff() <= 1e-9) {
            merged.back().second += mass;
        } else {
            merged.emplace_back(std::move(pt), mass);
        }
    }

    Matrix points(Index(merged.size()), d);
    Vector masses(Index(merged.size()));
    for (Index i = 0; i < Index(merged.size()); ++i) {
        points.row(i) = merged[std::size_t(i)].first.transpose();
        masses[i] = merged[std::size_t(i)].second;
    }
    masses /= masses.sum();  // dropped cells leave a deficit; renormalize
    return make_measure(std::move(points), std::move(masses));
}

}  // namespace phiot
