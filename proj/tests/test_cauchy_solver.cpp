#include "fractus/cauchy_solver.hpp"
#include "fractus/errors.hpp"
#include "fractus/special_functions.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace fractus;

namespace {

Dynamic scalar(std::function<double(double, double)> fn) {
    Dynamic d;
    d.m = 1;
    d.eval = [fn](const Vector& x, double t) { return Vector{fn(x[0], t)}; };
    return d;
}

} // namespace

TEST_CASE("Bielecki sandwich") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-5, 5);
    const TimeGrid g = make_grid(0, 1.5, 64, 2);
    for (int k = 0; k < 100; ++k) {
        GridFunction q(g, 2, 1);
        for (double& x : q.samples()) x = u(rng);
        for (double kk : {1.0, 5.0}) {
            const double w1 = bielecki_norm_l1(q, kk), p1 = bielecki_norm_l1(q, 0.0);
            CHECK(w1 <= p1 * (1 + 1e-14));
            CHECK(p1 <= std::exp(kk * 1.5) * w1 * (1 + 1e-14));
            const double ws = bielecki_norm_sup(q, kk), ps = bielecki_norm_sup(q, 0.0);
            CHECK(ws <= ps * (1 + 1e-14));
            CHECK(ps <= std::exp(kk * 1.5) * ws * (1 + 1e-14));
        }
    }
    CHECK(bielecki_norm_l1(GridFunction(g, 2, 1), 3.0) == 0.0);
    CHECK(bielecki_norm_sup(GridFunction(g, 2, 1), 3.0) == 0.0);
}

TEST_CASE("choose_k") {
    CHECK(choose_k(0.0, VectorOrder{0.5}) == std::pair<std::int64_t, double>{1, 0.0});
    const auto [k1, l1] = choose_k(1.0, VectorOrder{1.0});
    CHECK(k1 == 2);
    CHECK(l1 == 0.5);
    const auto [k2, l2] = choose_k(1.0, VectorOrder{0.5, 0.5});
    CHECK(k2 == 16);
    CHECK(l2 == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("trivial dynamics") {
    const TimeGrid g = make_grid(0, 1, 65, 2);
    const auto zero = scalar([](double, double) { return 0.0; });
    const auto [c, rc] = picard_caputo(zero, VectorOrder{0.5}, Vector{2.0}, g);
    for (std::size_t k = 0; k < g.N; ++k) CHECK(c(k, 0) == 2.0);
    const auto [r, rr] = picard_rl(zero, VectorOrder{0.5}, Vector{2.0}, g);
    CHECK(r.weight(0, 0) == 2.0);
    CHECK(r.regular.max_abs() == 0.0);
    CHECK(rr.iterations <= 2);
}

TEST_CASE("scalar linear problems against Mittag-Leffler") {
    const TimeGrid g = make_grid(0, 1, 257, 4);
    const auto lin = scalar([](double x, double) { return x; });
    const auto [c, rc] = picard_caputo(lin, VectorOrder{0.5}, Vector{1.0}, g);
    CHECK(rc.converged);
    for (std::size_t k = 0; k < g.N; ++k) {
        const double ex = ml_scalar({0.5, 1.0}, std::sqrt(g[k]));
        CHECK(std::abs(c(k, 0) - ex) <= 1e-3 * ex);
    }
    const auto [r, rr] = picard_rl(lin, VectorOrder{0.5}, Vector{1.0}, g);
    for (std::size_t k = 1; k + 1 < g.N; ++k) {
        const double ex = ml_scalar({0.5, 0.5}, std::sqrt(g[k])) / std::sqrt(g[k]);
        CHECK(std::abs(r.at(k)(0, 0) - ex) <= 1e-3 * ex);
    }
    const auto [e, re] = picard_caputo(scalar([](double x, double) { return -2.0 * x; }), VectorOrder{1.0},
                                       Vector{1.0}, make_grid(0, 1, 257, 1));
    for (std::size_t k = 0; k < 257; ++k) CHECK(e(k, 0) == doctest::Approx(std::exp(-2.0 * e.grid()[k])).epsilon(1e-4));
}

TEST_CASE("Caputo and R-L coincide for zero data") {
    const TimeGrid g = make_grid(0, 1, 257, default_grading(0.6));
    const auto lin = scalar([](double x, double) { return x; });
    const auto [c, rc] = picard_caputo(lin, VectorOrder{0.6}, Vector{0.0}, g);
    const auto [r, rr] = picard_rl(lin, VectorOrder{0.6}, Vector{0.0}, g);
    CHECK((c - r.regular).max_abs() <= 1e-8);
    CHECK(c.max_abs() == 0.0);
    const auto forced = scalar([](double x, double) { return x + 1.0; });
    const auto [c2, rc2] = picard_caputo(forced, VectorOrder{0.6}, Vector{0.0}, g);
    const auto [r2, rr2] = picard_rl(forced, VectorOrder{0.6}, Vector{0.0}, g);
    CHECK((c2 - r2.regular).max_abs() <= 1e-6);
}

TEST_CASE("contraction rate of converged iterations") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    const TimeGrid g = make_grid(0, 1, 129, default_grading(0.4));
    GridFunction A(g, 2, 2), B(g, 2, 1);
    for (std::size_t k = 0; k < g.N; ++k) {
        A.set(k, Matrix{{u(rng), u(rng)}, {u(rng), u(rng)}});
        B.set(k, Vector{1.0, std::sin(g[k])});
    }
    const Dynamic f = linear_dynamic(A, B);
    const auto [q, rep] = picard_caputo(f, VectorOrder{0.4, 0.7}, Vector{1.0, -0.5}, g);
    // steps at the rounding floor carry no contraction information
    const double floor = 16 * std::numeric_limits<double>::epsilon() *
                         bielecki_norm_sup(q, static_cast<double>(rep.bielecki_k));
    std::size_t last = rep.residuals.size();
    while (last > 0 && rep.residuals[last - 1] <= floor) --last;
    REQUIRE(last >= 6);
    for (std::size_t i = last - 5; i < last; ++i)
        CHECK(rep.residuals[i] <= (rep.contraction_ell + 0.1) * rep.residuals[i - 1]);
}

TEST_CASE("non-convergence and domains") {
    const TimeGrid g = make_grid(0, 1, 65, 2);
    const auto lin = scalar([](double x, double) { return x; });
    CHECK_THROWS_AS(picard_caputo(lin, VectorOrder{0.5}, Vector{1.0}, g, 1e-12, 1), ConvergenceError);
    Dynamic ball = lin;
    ball.domain_test = [](const Vector& x) { return std::abs(x[0]) < 1.5; };
    CHECK_THROWS_AS(picard_caputo(ball, VectorOrder{0.5}, Vector{1.0}, g), DomainExitError);
    CHECK_THROWS_AS(picard_rl(ball, VectorOrder{0.5}, Vector{1.0}, g), UnsupportedDomainError);
}

TEST_CASE("Lipschitz estimate") {
    const TimeGrid g = make_grid(0, 1, 17, 1);
    const auto lin = scalar([](double x, double) { return 3.0 * x; });
    CHECK(estimate_lipschitz(lin, Vector{0.0}, g) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("escape verdicts") {
    const auto sq = scalar([](double x, double) { return x * x; });
    const auto [q1, v1] = extend_maximal(sq, VectorOrder{1.0}, Vector{1.0}, 10.0, 2.0);
    REQUIRE(v1.kind == VerdictKind::escaped);
    CHECK(*v1.escape_time >= 0.85);
    CHECK(*v1.escape_time <= 0.95);
    const auto [q2, v2] = extend_maximal(sq, VectorOrder{0.5}, Vector{1.0}, 10.0, 2.0);
    REQUIRE(v2.kind == VerdictKind::escaped);
    CHECK(*v2.escape_time > 0.0);
    CHECK(*v2.escape_time <= 2.0);
    // the same ball as an admissible domain: iterates stop at its boundary
    Dynamic ball = sq;
    ball.domain_test = [](const Vector& x) { return std::abs(x[0]) < 10.0; };
    ExtendOptions coarse;
    coarse.n = 64;
    coarse.max_iter = 200;
    const auto [q4, v4] = extend_maximal(ball, VectorOrder{1.0}, Vector{1.0}, 10.0, 2.0, coarse);
    REQUIRE(v4.kind == VerdictKind::escaped);
    CHECK(*v4.escape_time >= 0.85);
    CHECK(*v4.escape_time <= 0.95);
    const auto lin = scalar([](double x, double) { return x; });
    const auto [q3, v3] = extend_maximal(lin, VectorOrder{0.5}, Vector{1.0}, 1e6, 1.0);
    CHECK(v3.kind == VerdictKind::global);
}
