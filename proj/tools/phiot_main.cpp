// Command-line front end: loads measures and costs, dispatches solves and
// writes machine-readable reports.
//
// Exit codes: 0 converged, 1 input error, 2 iteration cap reached,
// 3 root-solver failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "phiot/losses.hpp"
#include "phiot/multimarginal.hpp"

namespace {

using json = nlohmann::json;
using namespace phiot;

struct CommonOpts {
    std::string mu_path, nu_path;
    std::string cost_kind = "sqeuclidean";
    double p = 2.0;
    std::string cost_csv;
    double eps = 0.0;
    std::string reg = "shannon";
    double tsallis_p = 1.5;
    double tol = 1e-8;
    int max_iter = 10000;
    bool store_plan = false;
    std::string out;
};

void add_solver_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--reg", o.reg, "regularizer: shannon|quadratic|tsallis")
        ->check(CLI::IsMember({"shannon", "quadratic", "tsallis"}));
    cmd->add_option("--tsallis-p", o.tsallis_p, "tsallis exponent, p > 1");
    cmd->add_option("--tol", o.tol, "marginal L1 stopping tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", o.max_iter, "sweep cap")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "output path (stdout if omitted)");
}

void add_pair_flags(CLI::App* cmd, CommonOpts& o, bool with_eps = true) {
    cmd->add_option("--mu", o.mu_path, "first marginal, measure JSON")->required();
    cmd->add_option("--nu", o.nu_path, "second marginal, measure JSON")->required();
    cmd->add_option("--cost-kind", o.cost_kind, "sqeuclidean|euclidean|pnorm")
        ->check(CLI::IsMember({"sqeuclidean", "euclidean", "pnorm"}));
    cmd->add_option("--p", o.p, "exponent for pnorm costs");
    cmd->add_option("--cost-csv", o.cost_csv, "dense cost matrix CSV (overrides --cost-kind)");
    if (with_eps)
        cmd->add_option("--eps", o.eps, "regularization strength")
            ->required()
            ->check(CLI::PositiveNumber);
    add_solver_flags(cmd, o);
}

CostKind parse_kind(const std::string& kind) {
    if (kind == "sqeuclidean") return CostKind::SqEuclidean;
    if (kind == "euclidean") return CostKind::Euclidean;
    return CostKind::PNorm;
}

Regularizer make_reg(const CommonOpts& o) { return make_regularizer(o.reg, o.tsallis_p); }

SolverConfig make_cfg(const CommonOpts& o) {
    SolverConfig cfg;
    cfg.marginal_tol = o.tol;
    cfg.max_iter = o.max_iter;
    cfg.store_plan = o.store_plan;
    return cfg;
}

CostMatrix load_pair_cost(const CommonOpts& o, const DiscreteMeasure& mu,
                          const DiscreteMeasure& nu) {
    if (!o.cost_csv.empty()) return load_cost_matrix_file(o.cost_csv, mu.size(), nu.size());
    return build_cost(mu, nu, parse_kind(o.cost_kind), o.p);
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw Error("cannot write output file: " + out_path);
    f << text;
}

void write_plan_csv(const Matrix& masses, const std::string& out_path) {
    std::filesystem::path plan_path(out_path);
    plan_path.replace_extension(".plan.csv");
    std::ofstream f(plan_path, std::ios::binary);
    if (!f) throw Error("cannot write plan file: " + plan_path.string());
    char buf[64];
    for (Index i = 0; i < masses.rows(); ++i) {
        for (Index j = 0; j < masses.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", masses(i, j));
            f << buf << (j + 1 < masses.cols() ? "," : "");
        }
        f << "\n";
    }
}

json report_json(const CommonOpts& o, const LossReport& loss, double elapsed) {
    json doc;
    doc["command"] = "";
    doc["reg"] = o.reg;
    doc["eps"] = o.eps;
    doc["tol"] = o.tol;
    doc["value"] = loss.value;
    doc["dual_value"] = loss.dual_value;
    doc["primal_value"] = loss.primal_value;
    doc["gap"] = loss.gap;
    doc["iterations"] = loss.report.iterations;
    doc["converged"] = loss.report.converged;
    doc["stop_reason"] =
        loss.report.stop_reason == StopReason::Tolerance ? "tolerance" : "max_iter";
    if (!loss.report.marginal_errors.empty()) {
        doc["marginal_error_mu"] = loss.report.marginal_errors.back().first;
        doc["marginal_error_nu"] = loss.report.marginal_errors.back().second;
    }
    doc["shifts"] = loss.report.shifts;
    doc["elapsed_seconds"] = elapsed;
    return doc;
}

int finish(const json& doc, const CommonOpts& o, bool converged) {
    emit(doc.dump(2) + "\n", o.out);
    return converged ? 0 : 2;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_solve(const CommonOpts& o, bool with_potentials) {
    const auto mu = load_measure_file(o.mu_path);
    const auto nu = load_measure_file(o.nu_path);
    const auto cost = load_pair_cost(o, mu, nu);
    const auto t0 = std::chrono::steady_clock::now();
    const LossReport loss = ot_loss(mu, nu, cost, o.eps, make_reg(o), make_cfg(o));
    json doc = report_json(o, loss, seconds_since(t0));
    doc["command"] = with_potentials ? "solve" : "loss";
    if (with_potentials) {
        doc["u"] = std::vector<double>(loss.potentials.u.begin(), loss.potentials.u.end());
        doc["v"] = std::vector<double>(loss.potentials.v.begin(), loss.potentials.v.end());
    }
    if (o.store_plan) {
        const Problem pb{mu, nu, cost, o.eps, make_reg(o)};
        write_plan_csv(recover_plan(loss.potentials, pb).masses, o.out);
    }
    return finish(doc, o, loss.report.converged);
}

int run_divergence(const CommonOpts& o) {
    const auto mu = load_measure_file(o.mu_path);
    const auto nu = load_measure_file(o.nu_path);
    if (!o.cost_csv.empty())
        throw InvalidParameter("divergence needs a metric cost kind, not --cost-csv");
    const auto builder = metric_cost_builder(parse_kind(o.cost_kind), o.p);
    const auto reg = make_reg(o);
    const auto cfg = make_cfg(o);

    const auto t0 = std::chrono::steady_clock::now();
    const LossReport xy = ot_loss(mu, nu, builder(mu, nu), o.eps, reg, cfg);
    const LossReport xx = ot_loss(mu, mu, builder(mu, mu), o.eps, reg, cfg);
    const LossReport yy = ot_loss(nu, nu, builder(nu, nu), o.eps, reg, cfg);

    json doc;
    doc["command"] = "divergence";
    doc["reg"] = o.reg;
    doc["eps"] = o.eps;
    doc["value"] = xy.value - 0.5 * (xx.value + yy.value);
    doc["term_mu_nu"] = xy.value;
    doc["term_mu_mu"] = xx.value;
    doc["term_nu_nu"] = yy.value;
    const bool conv =
        xy.report.converged && xx.report.converged && yy.report.converged;
    doc["converged"] = conv;
    doc["iterations"] =
        xy.report.iterations + xx.report.iterations + yy.report.iterations;
    doc["elapsed_seconds"] = seconds_since(t0);
    return finish(doc, o, conv);
}

int run_grad(const CommonOpts& o) {
    const auto mu = load_measure_file(o.mu_path);
    const auto nu = load_measure_file(o.nu_path);
    const auto cost = load_pair_cost(o, mu, nu);
    const auto t0 = std::chrono::steady_clock::now();
    const LossReport loss = ot_loss(mu, nu, cost, o.eps, make_reg(o), make_cfg(o));
    const GradientPair g = gradient(mu, nu, cost, o.eps, make_reg(o), make_cfg(o));
    json doc = report_json(o, loss, seconds_since(t0));
    doc["command"] = "grad";
    doc["g_mu"] = std::vector<double>(g.g_mu.begin(), g.g_mu.end());
    doc["g_nu"] = std::vector<double>(g.g_nu.begin(), g.g_nu.end());
    return finish(doc, o, loss.report.converged);
}

int run_limits(const CommonOpts& o, const std::vector<double>& ladder) {
    const auto mu = load_measure_file(o.mu_path);
    const auto nu = load_measure_file(o.nu_path);
    if (!o.cost_csv.empty())
        throw InvalidParameter("limits needs a metric cost kind, not --cost-csv");
    const auto builder = metric_cost_builder(parse_kind(o.cost_kind), o.p);
    const auto rows = limit_probe(mu, nu, builder, make_reg(o), ladder, make_cfg(o));
    emit(limit_probe_csv(rows), o.out);
    for (const auto& r : rows)
        if (!r.converged) return 2;
    return 0;
}

struct MMOpts {
    std::vector<std::string> marginal_paths;
    std::vector<double> bary_weights;
    CommonOpts common;
};

std::pair<MMProblem, std::vector<DiscreteMeasure>> load_mm_problem(const MMOpts& mo) {
    std::vector<DiscreteMeasure> marginals;
    for (const auto& path : mo.marginal_paths) marginals.push_back(load_measure_file(path));
    Vector lambda;
    if (mo.bary_weights.empty()) {
        lambda = Vector::Constant(Index(marginals.size()), 1.0 / double(marginals.size()));
    } else {
        lambda = Eigen::Map<const Vector>(mo.bary_weights.data(), Index(mo.bary_weights.size()));
    }
    MMProblem pb;
    pb.cost = build_barycenter_cost(marginals, lambda);
    pb.marginals = marginals;
    pb.eps = mo.common.eps;
    pb.reg = make_reg(mo.common);
    return {std::move(pb), std::move(marginals)};
}

Vector mm_lambda(const MMOpts& mo, std::size_t n) {
    if (mo.bary_weights.empty()) return Vector::Constant(Index(n), 1.0 / double(n));
    return Eigen::Map<const Vector>(mo.bary_weights.data(), Index(mo.bary_weights.size()));
}

int run_mm_solve(const MMOpts& mo) {
    auto [pb, marginals] = load_mm_problem(mo);
    const auto t0 = std::chrono::steady_clock::now();
    auto [pot, rep] = mm_solve(pb, make_cfg(mo.common));

    json doc;
    doc["command"] = "mm-solve";
    doc["reg"] = mo.common.reg;
    doc["eps"] = mo.common.eps;
    doc["value"] = mm_dual_value(pot, pb);
    doc["iterations"] = rep.iterations;
    doc["converged"] = rep.converged;
    doc["stop_reason"] = rep.stop_reason == StopReason::Tolerance ? "tolerance" : "max_iter";
    if (!rep.marginal_errors.empty())
        doc["marginal_errors"] = std::vector<double>(rep.marginal_errors.back().begin(),
                                                     rep.marginal_errors.back().end());
    json pots = json::array();
    for (const auto& u : pot.u) pots.push_back(std::vector<double>(u.begin(), u.end()));
    doc["u"] = std::move(pots);
    doc["elapsed_seconds"] = seconds_since(t0);

    if (mo.common.store_plan) {
        const MMCoupling cp = mm_recover_plan(pot, pb);
        std::filesystem::path plan_path(mo.common.out);
        plan_path.replace_extension(".plan.csv");
        std::ofstream f(plan_path, std::ios::binary);
        if (!f) throw Error("cannot write plan file: " + plan_path.string());
        char buf[64];
        for (Index r = 0; r < cp.masses.size(); ++r) {
            std::snprintf(buf, sizeof(buf), "%.17g", cp.masses[r]);
            f << buf << "\n";
        }
    }
    return finish(doc, mo.common, rep.converged);
}

int run_barycenter(const MMOpts& mo) {
    auto [pb, marginals] = load_mm_problem(mo);
    auto [pot, rep] = mm_solve(pb, make_cfg(mo.common));
    const MMCoupling cp = mm_recover_plan(pot, pb);
    const DiscreteMeasure bary =
        barycenter_extract(cp, marginals, mm_lambda(mo, marginals.size()));
    emit(measure_to_json(bary) + "\n", mo.common.out);
    return rep.converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"solver for discrete optimal transport with convex regularization"};
    app.require_subcommand(1);
    app.failure_message(
        [](const CLI::App*, const CLI::Error& e) { return std::string(e.what()) + "\n"; });

    CommonOpts solve_o, loss_o, div_o, grad_o, limits_o;
    MMOpts mm_o, bary_o;
    std::vector<double> ladder;

    auto* solve_cmd = app.add_subcommand("solve", "solve one instance, report potentials");
    add_pair_flags(solve_cmd, solve_o);
    solve_cmd->add_flag("--store-plan", solve_o.store_plan, "write the plan next to --out")
        ->needs(solve_cmd->get_option("--out"));

    auto* loss_cmd = app.add_subcommand("loss", "transport loss only");
    add_pair_flags(loss_cmd, loss_o);

    auto* div_cmd = app.add_subcommand("divergence", "debiased transport divergence");
    add_pair_flags(div_cmd, div_o);

    auto* grad_cmd = app.add_subcommand("grad", "loss gradient in the marginal weights");
    add_pair_flags(grad_cmd, grad_o);

    auto* limits_cmd = app.add_subcommand("limits", "loss/divergence table over an eps ladder");
    add_pair_flags(limits_cmd, limits_o, /*with_eps=*/false);
    limits_cmd->add_option("--eps-ladder", ladder, "comma-separated eps values")
        ->required()
        ->delimiter(',');

    auto* mm_cmd = app.add_subcommand("mm-solve", "multi-marginal solve, pairwise squared cost");
    mm_cmd->add_option("--marginals", mm_o.marginal_paths, "measure JSON paths (two or more)")
        ->required()
        ->expected(2, -1);
    mm_cmd->add_option("--bary-weights", mm_o.bary_weights, "coordinate weights (default uniform)")
        ->delimiter(',');
    mm_cmd->add_option("--eps", mm_o.common.eps, "regularization strength")
        ->required()
        ->check(CLI::PositiveNumber);
    add_solver_flags(mm_cmd, mm_o.common);
    mm_cmd->add_flag("--store-plan", mm_o.common.store_plan, "write the plan next to --out")
        ->needs(mm_cmd->get_option("--out"));

    auto* bary_cmd = app.add_subcommand("barycenter", "extracted barycenter as measure JSON");
    bary_cmd->add_option("--marginals", bary_o.marginal_paths, "measure JSON paths (two or more)")
        ->required()
        ->expected(2, -1);
    bary_cmd->add_option("--bary-weights", bary_o.bary_weights,
                         "coordinate weights (default uniform)")
        ->delimiter(',');
    bary_cmd->add_option("--eps", bary_o.common.eps, "regularization strength")
        ->required()
        ->check(CLI::PositiveNumber);
    add_solver_flags(bary_cmd, bary_o.common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (solve_cmd->parsed()) return run_solve(solve_o, true);
        if (loss_cmd->parsed()) return run_solve(loss_o, false);
        if (div_cmd->parsed()) return run_divergence(div_o);
        if (grad_cmd->parsed()) return run_grad(grad_o);
        if (limits_cmd->parsed()) return run_limits(limits_o, ladder);
        if (mm_cmd->parsed()) return run_mm_solve(mm_o);
        if (bary_cmd->parsed()) return run_barycenter(bary_o);
    } catch (const RootSolveFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
