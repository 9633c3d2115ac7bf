// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sbnet/convex_engine.hpp"
#include "sbnet/rng.hpp"

using namespace sbnet;

TEST_CASE("quadratic with a linear constraint hits the known optimum") {
    // max -(x-1)^2 - (y-1)^2  s.t.  x + y <= 1  ->  (0.5, 0.5), f = -0.5
    ConvexSubproblem sub;
    sub.lb = Eigen::VectorXd::Constant(2, -5.0);
    sub.ub = Eigen::VectorXd::Constant(2, 5.0);
    sub.objective = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        if (g) *g = -2.0 * (x.array() - 1.0).matrix();
        return -(x.array() - 1.0).square().sum();
    };
    sub.constraints.push_back([](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        if (g) {
            g->resize(2);
            (*g) << -1.0, -1.0;
        }
        return 1.0 - x(0) - x(1);
    });
    const KktReport rep = solve(sub, Eigen::VectorXd::Constant(2, -1.0));
    CHECK(rep.converged);
    CHECK(rep.solution(0) == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(rep.solution(1) == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(rep.objective_value == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(rep.max_primal_residual <= 1e-8);
    CHECK(rep.stationarity_residual <= 1e-6);
}

namespace {

// 1-D instance shaped like a relaxed rate minus a power cost:
//   f(p) = log2(1 + e^p) - c * e^p over p in [lb, ub]
ConvexSubproblem scalar_rate_problem(double c, double lb, double ub) {
    ConvexSubproblem sub;
    sub.lb = Eigen::VectorXd::Constant(1, lb);
    sub.ub = Eigen::VectorXd::Constant(1, ub);
    sub.objective = [c](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        const double e = std::exp(x(0));
        if (g) {
            g->resize(1);
            (*g)(0) = e / ((1.0 + e) * kLn2) - c * e;
        }
        return std::log2(1.0 + e) - c * e;
    };
    return sub;
}

double bisect_optimum(double c, double lb, double ub) {
    // f'(p) = 0  <=>  1/((1+e^p) ln2) = c; f' is strictly decreasing
    auto deriv = [c](double p) {
        const double e = std::exp(p);
        return e / ((1.0 + e) * kLn2) - c * e;
    };
    if (deriv(ub) >= 0.0) return ub;
    if (deriv(lb) <= 0.0) return lb;
    double lo = lb, hi = ub;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (deriv(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("scalar rate/cost trade-off matches a bisection oracle") {
    for (const double c : {0.01, 0.1, 0.5}) {
        ConvexSubproblem sub = scalar_rate_problem(c, -8.0, 4.0);
        const KktReport rep = solve(sub, Eigen::VectorXd::Constant(1, -2.0));
        const double p_star = bisect_optimum(c, -8.0, 4.0);
        CHECK(rep.converged);
        CHECK(rep.solution(0) == doctest::Approx(p_star).epsilon(1e-4));
    }
    // cost so small the cap (upper box bound) binds
    ConvexSubproblem sub = scalar_rate_problem(1e-6, -8.0, 1.0);
    const KktReport rep = solve(sub, Eigen::VectorXd::Constant(1, -2.0));
    CHECK(rep.solution(0) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("solution dominates random feasible samples") {
    // 3-D log-sum-exp objective with a coupling constraint
    ConvexSubproblem sub;
    sub.lb = Eigen::VectorXd::Constant(3, -6.0);
    sub.ub = Eigen::VectorXd::Constant(3, 2.0);
    const Eigen::Vector3d w(1.0, 2.0, 0.5);
    sub.objective = [w](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        double f = 0.0;
        if (g) g->setZero(3);
        for (int j = 0; j < 3; ++j) {
            const double e = std::exp(x(j));
            f += w(j) * std::log1p(e);
            if (g) (*g)(j) = w(j) * e / (1.0 + e);
        }
        return f;
    };
    sub.constraints.push_back([](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        // e^x0 + e^x1 + e^x2 <= 2
        double s = 0.0;
        if (g) g->resize(3);
        for (int j = 0; j < 3; ++j) {
            const double e = std::exp(x(j));
            s += e;
            if (g) (*g)(j) = -e;
        }
        return 2.0 - s;
    });
    const KktReport rep = solve(sub, Eigen::VectorXd::Constant(3, -3.0));
    CHECK(rep.converged);

    Rng rng(55);
    for (int i = 0; i < 10000; ++i) {
        Eigen::VectorXd x(3);
        for (int j = 0; j < 3; ++j) x(j) = rng.uniform(-6.0, 2.0);
        if (sub.constraints[0](x, nullptr) < 0.0) continue;
        CHECK(sub.objective(x, nullptr) <= rep.objective_value + 1e-6);
    }
}

TEST_CASE("objective never drops below a feasible start") {
    ConvexSubproblem sub = scalar_rate_problem(0.1, -8.0, 4.0);
    const Eigen::VectorXd start = Eigen::VectorXd::Constant(1, 0.5);
    const KktReport rep = solve(sub, start);
    CHECK(rep.objective_value >= sub.objective(start, nullptr) - 1e-12);
}

TEST_CASE("two different starts agree on the optimum") {
    ConvexSubproblem sub = scalar_rate_problem(0.05, -10.0, 5.0);
    const KktReport a = solve(sub, Eigen::VectorXd::Constant(1, -9.0));
    const KktReport b = solve(sub, Eigen::VectorXd::Constant(1, 4.0));
    CHECK(std::abs(a.solution(0) - b.solution(0)) <= 1e-5 * (1.0 + std::abs(a.solution(0))));
    CHECK(a.objective_value == doctest::Approx(b.objective_value).epsilon(1e-8));
}

TEST_CASE("infeasible starts are reported, boundary starts are nudged") {
    ConvexSubproblem sub;
    sub.lb = Eigen::VectorXd::Constant(1, 0.0);
    sub.ub = Eigen::VectorXd::Constant(1, 1.0);
    sub.objective = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        if (g) {
            g->resize(1);
            (*g)(0) = 1.0;
        }
        return x(0);
    };
    sub.constraints.push_back([](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        if (g) {
            g->resize(1);
            (*g)(0) = -1.0;
        }
        return 0.5 - x(0);
    });
    // start violating the constraint by a lot
    CHECK_THROWS_AS(solve(sub, Eigen::VectorXd::Constant(1, 0.9)), InfeasibleStart);
    // start exactly on the constraint boundary: nudged inside, then solved
    const KktReport rep = solve(sub, Eigen::VectorXd::Constant(1, 0.5));
    CHECK(rep.solution(0) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("slack wrapper stops early once the slack is positive") {
    // maximize s subject to s <= 3 - x^2 (always satisfiable)
    ConvexSubproblem sub;
    sub.lb = Eigen::VectorXd::Constant(2, -10.0);
    sub.ub = Eigen::VectorXd::Constant(2, 10.0);
    sub.objective = [](const Eigen::VectorXd& y, Eigen::VectorXd* g) {
        if (g) {
            g->setZero(2);
            (*g)(1) = 1.0;
        }
        return y(1);
    };
    sub.constraints.push_back([](const Eigen::VectorXd& y, Eigen::VectorXd* g) {
        if (g) {
            g->resize(2);
            (*g)(0) = -2.0 * y(0);
            (*g)(1) = -1.0;
        }
        return 3.0 - y(0) * y(0) - y(1);
    });
    Eigen::VectorXd y0(2);
    y0 << 2.0, -5.0;
    auto [rep, slack] = solve_feasibility(sub, y0);
    CHECK(slack > 0.0);
}
