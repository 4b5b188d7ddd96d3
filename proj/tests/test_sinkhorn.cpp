#include <doctest.h>

#include <cmath>

#include "testutil.hpp"

using namespace phiot;
using testutil::fixture_2x2;
using testutil::fixture_2x2_objective;
using testutil::golden_min;
using testutil::make_rng;
using testutil::random_cost;
using testutil::random_measure;

namespace {

const Regularizer kRegs[] = {Regularizer::shannon(), Regularizer::quadratic(),
                             Regularizer::tsallis(1.5)};

Problem random_problem(std::mt19937_64& g, Index n, Index m, double eps,
                       const Regularizer& reg) {
    return Problem{random_measure(g, n), random_measure(g, m), random_cost(g, n, m), eps, reg};
}

}  // namespace

TEST_CASE("1x1 problems converge in one sweep") {
    Matrix pt(1, 1);
    pt << 0.0;
    Matrix c(1, 1);
    c << 3.0;
    for (const auto& reg : kRegs) {
        const Problem pb{uniform_measure(pt), uniform_measure(pt), make_cost(c), 0.7, reg};
        const auto [pot, rep] = solve(pb);
        CHECK(rep.converged);
        CHECK(rep.iterations == 1);
        CHECK(pot.u[0] + pot.v[0] == doctest::Approx(3.0).epsilon(1e-10));
        const auto cp = recover_plan(pot, pb);
        CHECK(cp.masses(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("zero cost yields the product plan and zero potentials") {
    auto g = make_rng(5);
    for (const auto& reg : kRegs) {
        const auto mu = random_measure(g, 4);
        const auto nu = random_measure(g, 3);
        const Problem pb{mu, nu, make_cost(Matrix::Zero(4, 3)), 0.5, reg};
        const auto [pot, rep] = solve(pb);
        CHECK(rep.converged);
        CHECK(pot.u.cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(pot.v.cwiseAbs().maxCoeff() <= 1e-10);
        const auto cp = recover_plan(pot, pb);
        CHECK((cp.alpha.array() - 1.0).abs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("2x2 shannon solve matches the golden-section oracle") {
    const double eps = 0.5;
    const auto sh = Regularizer::shannon();
    const Problem pb = fixture_2x2(eps, sh);
    const auto [pot, rep] = solve(pb);
    REQUIRE(rep.converged);

    const double a_star =
        golden_min([&](double a) { return fixture_2x2_objective(a, eps, sh); }, 0.0, 0.5);
    Matrix oracle(2, 2);
    oracle << a_star, 0.5 - a_star, 0.5 - a_star, a_star;
    CHECK(a_star == doctest::Approx(0.4403985406).epsilon(1e-8));

    const auto cp = recover_plan(pot, pb);
    CHECK(testutil::max_abs_diff(cp.masses, oracle) <= 1e-6);
    CHECK(dual_value(pot, pb) == doctest::Approx(0.2831095847584864).epsilon(1e-9));
}

TEST_CASE("recover_plan formula cases") {
    Matrix pt(1, 1);
    pt << 0.0;
    const auto single = uniform_measure(pt);

    SUBCASE("zero potentials and cost give unit density") {
        const Problem pb{single, single, make_cost(Matrix::Zero(1, 1)), 1.0,
                         Regularizer::shannon()};
        const auto cp = recover_plan({Vector::Zero(1), Vector::Zero(1)}, pb);
        CHECK(cp.alpha(0, 0) == 1.0);
        CHECK(cp.masses(0, 0) == 1.0);
    }

    SUBCASE("quadratic cutoff produces exact zeros") {
        Matrix c(1, 1);
        c << 1.0;
        const double eps = 0.25;
        const Problem pb{single, single, make_cost(c), eps, Regularizer::quadratic()};
        // u + v - c = -0.25 = -eps, on the positive-part boundary
        Vector u(1), v(1);
        u << 0.5;
        v << 0.25;
        CHECK(recover_plan({u, v}, pb).alpha(0, 0) == 0.0);
        v << 0.1;  // strictly below the cutoff
        CHECK(recover_plan({u, v}, pb).alpha(0, 0) == 0.0);
    }

    SUBCASE("u + v = c gives density one") {
        Matrix c(1, 1);
        c << 3.0;
        const Problem pb{single, single, make_cost(c), 0.5, Regularizer::tsallis(2.5)};
        Vector u(1), v(1);
        u << 1.0;
        v << 2.0;
        const auto cp = recover_plan({u, v}, pb);
        CHECK(cp.alpha(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(cp.masses(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("marginal_errors on hand-built couplings") {
    Matrix pts(2, 1);
    pts << 0.0, 1.0;
    const auto m = uniform_measure(pts);
    const Problem pb = fixture_2x2(1.0, Regularizer::shannon());

    Coupling cp;
    cp.alpha = Matrix::Ones(2, 2);
    cp.masses = Matrix::Constant(2, 2, 0.25);
    auto [e1, e2] = marginal_errors(cp, pb);
    CHECK(e1 == 0.0);
    CHECK(e2 == 0.0);

    cp.alpha = 2.0 * Matrix::Identity(2, 2);
    cp.masses = 0.5 * Matrix::Identity(2, 2);
    std::tie(e1, e2) = marginal_errors(cp, pb);
    CHECK(e1 == 0.0);
    CHECK(e2 == 0.0);

    cp.alpha = Matrix::Zero(2, 2);
    cp.masses = Matrix::Zero(2, 2);
    std::tie(e1, e2) = marginal_errors(cp, pb);
    CHECK(e1 == 1.0);
    CHECK(e2 == 1.0);
}

TEST_CASE("check_slackness distinguishes optimal from arbitrary potentials") {
    const auto sh = Regularizer::shannon();
    const Problem pb = fixture_2x2(0.5, sh);

    const auto [pot, rep] = solve(pb);
    REQUIRE(rep.converged);
    const auto good = check_slackness(pot, pb, 1e-6);
    CHECK(good.feasible);
    CHECK(good.duality_gap <= 1e-6);

    const auto bad = check_slackness({Vector::Zero(2), Vector::Zero(2)}, pb, 1e-6);
    CHECK_FALSE(bad.feasible);

    // 1x1 with u + v = c is exactly optimal
    Matrix pt(1, 1), c(1, 1);
    pt << 0.0;
    c << 2.0;
    const Problem tiny{uniform_measure(pt), uniform_measure(pt), make_cost(c), 1.0, sh};
    Vector u(1), v(1);
    u << 1.5;
    v << 0.5;
    const auto exact = check_slackness({u, v}, tiny, 1e-9);
    CHECK(exact.feasible);
    CHECK(exact.duality_gap <= 1e-12);
}

TEST_CASE("slackness residuals ignore a shared gauge translation") {
    const Problem pb = fixture_2x2(0.5, Regularizer::shannon());
    auto [pot, rep] = solve(pb);
    REQUIRE(rep.converged);
    pot.u.array() += 0.3;  // translate u only: still optimal as a ray
    const auto rep2 = check_slackness(pot, pb, 1e-6);
    CHECK(rep2.transform_residuals.first <= 1e-6);
    CHECK(rep2.transform_residuals.second <= 1e-6);
    CHECK_FALSE(rep2.feasible);  // the plan itself is off
}

TEST_CASE("dual values are nondecreasing along the iteration") {
    auto g = make_rng(71);
    for (const auto& reg : kRegs) {
        const Problem pb = random_problem(g, 20, 20, 0.2, reg);
        const auto [pot, rep] = solve(pb);
        CHECK(rep.converged);
        for (std::size_t k = 1; k < rep.dual_values.size(); ++k)
            CHECK(rep.dual_values[k] >= rep.dual_values[k - 1] - 1e-10);
    }
}

TEST_CASE("potentials stay bounded by twice the cost sup norm") {
    auto g = make_rng(73);
    for (const auto& reg : kRegs) {
        const Problem pb = random_problem(g, 12, 9, 0.3, reg);
        SolverConfig one_sweep;
        one_sweep.max_iter = 1;
        const auto [pot1, rep1] = solve(pb, one_sweep);
        CHECK(pot1.u.cwiseAbs().maxCoeff() <= 2.0 * pb.cost.sup_norm + 1e-6);
        CHECK(pot1.v.cwiseAbs().maxCoeff() <= 2.0 * pb.cost.sup_norm + 1e-6);

        const auto [pot, rep] = solve(pb);
        CHECK(rep.converged);
        CHECK(pot.u.cwiseAbs().maxCoeff() <= 2.0 * pb.cost.sup_norm + 1e-6);
        CHECK(pot.v.cwiseAbs().maxCoeff() <= 2.0 * pb.cost.sup_norm + 1e-6);
        CHECK(pb.mu.weights.dot(pot.u) == doctest::Approx(pb.nu.weights.dot(pot.v)).epsilon(1e-9));
    }
}

TEST_CASE("shifting the cost by a constant moves the loss, not the plan") {
    auto g = make_rng(79);
    const double s = 0.7;
    for (const auto& reg : kRegs) {
        Problem pb = random_problem(g, 8, 11, 0.4, reg);
        Problem shifted = pb;
        shifted.cost = make_cost(pb.cost.entries.array() + s);

        const auto [pot_a, rep_a] = solve(pb);
        const auto [pot_b, rep_b] = solve(shifted);
        REQUIRE(rep_a.converged);
        REQUIRE(rep_b.converged);
        CHECK(testutil::l1_diff(recover_plan(pot_a, pb).masses,
                                recover_plan(pot_b, shifted).masses) <= 1e-9);
        CHECK(dual_value(pot_b, shifted) - dual_value(pot_a, pb) ==
              doctest::Approx(s).epsilon(1e-9));
    }
}

TEST_CASE("random instances converge and the last two iterates agree") {
    auto g = make_rng(83);
    for (const auto& reg : kRegs) {
        const Problem pb = random_problem(g, 20, 20, 0.15, reg);
        const auto [pot, rep] = solve(pb);
        REQUIRE(rep.converged);
        REQUIRE(rep.iterations >= 2);

        // deterministic replay up to the second-to-last sweep
        SolverConfig clipped;
        clipped.max_iter = rep.iterations - 1;
        const auto [pot_prev, rep_prev] = solve(pb, clipped);
        CHECK(testutil::l1_diff(recover_plan(pot, pb).masses,
                                recover_plan(pot_prev, pb).masses) <= 1e-6);
    }
}

TEST_CASE("the converged plan does not depend on the initialization") {
    auto g = make_rng(89);
    for (const auto& reg : kRegs) {
        const Problem pb = random_problem(g, 10, 10, 0.3, reg);
        const auto [pot, rep] = solve(pb);
        REQUIRE(rep.converged);
        const Matrix reference = recover_plan(pot, pb).masses;

        // hand-rolled iteration from a random bounded start
        CostMatrix cost_t;
        cost_t.entries = pb.cost.entries.transpose();
        cost_t.sup_norm = pb.cost.sup_norm;
        Vector v = testutil::random_vector(g, 10, -pb.cost.sup_norm, pb.cost.sup_norm);
        Vector u;
        for (int it = 0; it < 300; ++it) {
            u = cep_transform(v, cost_t, pb.eps, pb.reg, pb.nu, TransformDirection::RowsToCols);
            v = cep_transform(u, pb.cost, pb.eps, pb.reg, pb.mu, TransformDirection::RowsToCols);
        }
        const Matrix other = recover_plan({u, v}, pb).masses;
        CHECK(testutil::l1_diff(reference, other) <= 1e-6);
    }
}

TEST_CASE("solver input validation") {
    const Problem pb = fixture_2x2(0.5, Regularizer::shannon());
    Problem bad_eps = pb;
    bad_eps.eps = 0.0;
    CHECK_THROWS_AS(solve(bad_eps), InvalidParameter);

    Problem bad_shape = pb;
    bad_shape.cost = make_cost(Matrix::Zero(3, 2));
    CHECK_THROWS_AS(solve(bad_shape), DimensionMismatch);

    SolverConfig cfg;
    cfg.marginal_tol = 0.0;
    CHECK_THROWS_AS(solve(pb, cfg), InvalidParameter);
}

TEST_CASE("hitting the sweep cap is reported, not thrown") {
    auto g = make_rng(97);
    const Problem pb = random_problem(g, 15, 15, 0.05, Regularizer::shannon());
    SolverConfig cfg;
    cfg.max_iter = 2;
    const auto [pot, rep] = solve(pb, cfg);
    CHECK_FALSE(rep.converged);
    CHECK(rep.stop_reason == StopReason::MaxIter);
    CHECK(rep.iterations == 2);
}
