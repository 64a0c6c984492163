#include "fractus/cauchy_solver.hpp"
#include "fractus/errors.hpp"
#include "fractus/special_functions.hpp"
#include "fractus/transition.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fractus;

namespace {

GridFunction constant(const TimeGrid& g, const Matrix& A) {
    GridFunction out(g, A.rows(), A.cols());
    for (std::size_t k = 0; k < g.N; ++k) out.set(k, A);
    return out;
}

Matrix expm(const Matrix& A) {
    int s = 0;
    double n = A.norm_inf();
    while (n > 0.5) {
        n /= 2;
        ++s;
    }
    const Matrix X = std::pow(0.5, s) * A;
    Matrix E = Matrix::identity(A.rows()), T = E;
    for (int k = 1; k < 30; ++k) {
        T = (1.0 / k) * (T * X);
        E += T;
    }
    for (int i = 0; i < s; ++i) E = E * E;
    return E;
}

double rel(const Matrix& x, const Matrix& ref) { return (x - ref).max_abs() / ref.max_abs(); }

} // namespace

TEST_CASE("zero coefficient gives the bare kernel") {
    const TimeGrid g = make_grid(0, 1, 33, 2);
    const VectorOrder a{0.4, 0.7};
    const GridFunction Z0 = constant(g, Matrix(2, 2));
    const auto z = transition_rl(Z0, MatrixOrder::row_constant(a), g);
    const auto cz = transition_caputo(Z0, MatrixOrder::row_constant(a), g);
    CHECK(z.amplitude(0, 0) == doctest::Approx(1 / std::tgamma(0.4)).epsilon(1e-15));
    CHECK(z.amplitude(1, 1) == doctest::Approx(1 / std::tgamma(0.7)).epsilon(1e-15));
    for (std::size_t i = 0; i < g.N; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            CHECK(z.regular(i, j).max_abs() == 0.0);
            CHECK(cz.regular(i, j) == Matrix::identity(2));
        }
}

TEST_CASE("Caputo diagonal blocks are the identity") {
    const TimeGrid g = make_grid(0, 1, 33, 2);
    const GridFunction A = GridFunction::from_function(g, 2, 2, [](double t) {
        return Matrix{{std::cos(t), 1.0}, {-t, 0.5}};
    });
    const auto cz = transition_caputo(A, MatrixOrder::row_constant(VectorOrder{0.5, 0.8}), g);
    for (std::size_t i = 0; i < g.N; ++i) CHECK(cz.regular(i, i) == Matrix::identity(2));
}

TEST_CASE("constant scalar coefficient closed forms") {
    double prev_c = 1.0, prev_z = 1.0;
    for (std::size_t n : {129u, 257u}) {
        const TimeGrid g = make_grid(0, 1, n, 4);
        const auto ord = MatrixOrder::row_constant(VectorOrder{0.5});
        const GridFunction A = constant(g, Matrix{{1.0}});
        const auto cz = transition_caputo(A, ord, g);
        const auto z = transition_rl(A, ord, g);
        double ec = 0.0, ez = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            const double t = g[i];
            const double c_ex = ml_scalar({0.5, 1.0}, std::sqrt(t));
            ec = std::max(ec, std::abs(cz.regular(i, 0)(0, 0) - c_ex) / c_ex);
            if (i + 1 < n) {
                const double z_ex = ml_scalar({0.5, 0.5}, std::sqrt(t)) / std::sqrt(t);
                ez = std::max(ez, std::abs(z.full(i, 0)(0, 0) - z_ex) / z_ex);
            }
        }
        CHECK(ec <= 1e-3);
        CHECK(ez <= 1e-2);
        CHECK(ec < prev_c);
        CHECK(ez < prev_z);
        prev_c = ec;
        prev_z = ez;
    }
}

TEST_CASE("constant matrix coefficient with a uniform order") {
    const std::size_t n = 257;
    const TimeGrid g = make_grid(0, 1, n, 4);
    const Matrix M{{0.5, -0.3}, {0.2, 0.4}};
    const auto ord = MatrixOrder::row_constant(VectorOrder{0.6, 0.6});
    const GridFunction A = constant(g, M);
    const auto z = transition_rl(A, ord, g);
    const auto cz = transition_caputo(A, ord, g);
    double ez = 0.0, ec = 0.0;
    for (std::size_t j = 0; j + 1 < n; j += 32)
        for (std::size_t i = j + 1; i < n; ++i) {
            const double u = g[i] - g[j], s = std::pow(u, 0.6);
            ec = std::max(ec, rel(cz.regular(i, j), ml_matrix({0.6, 1.0}, M, s)));
            if (i + 1 < n) ez = std::max(ez, rel(z.full(i, j), std::pow(u, -0.4) * ml_matrix({0.6, 0.6}, M, s)));
        }
    CHECK(ec <= 1e-3);
    CHECK(ez <= 1e-3);
}

TEST_CASE("classical limit matches the matrix exponential") {
    const std::size_t n = 129;
    const TimeGrid g = make_grid(0, 1, n, 1);
    const Matrix M{{0.3, -0.5, 0.2}, {0.1, 0.4, -0.6}, {-0.2, 0.7, 0.1}};
    const auto ord = MatrixOrder::row_constant(VectorOrder{1, 1, 1});
    const auto cz = transition_caputo(constant(g, M), ord, g);
    const auto z = transition_rl(constant(g, M), ord, g);
    double e = 0.0, er = 0.0;
    for (std::size_t j = 0; j < n; j += 9)
        for (std::size_t i = j; i < n; ++i) {
            const Matrix E = expm((g[i] - g[j]) * M);
            e = std::max(e, (cz.regular(i, j) - E).max_abs());
            if (i > j) er = std::max(er, (z.full(i, j) - E).max_abs());
        }
    CHECK(e <= 1e-6);
    CHECK(er <= 1e-6);
}

TEST_CASE("theta bound") {
    const auto half = MatrixOrder::row_constant(VectorOrder{0.5});
    // independent 200-term summation of Σ_p 1/Γ(0.5(p+1))
    CHECK(theta_bound(1.0, half, 0, 1).theta == doctest::Approx(5.5731696643100397533).epsilon(1e-12));

    const auto mixed = MatrixOrder::row_constant(VectorOrder{0.4, 0.7});
    const ThetaBound zero = theta_bound(0.0, mixed, 0, 1);
    CHECK(zero.theta == std::max(1 / std::tgamma(0.4), 1 / std::tgamma(0.7)));
    double prev = 0.0;
    for (double M : {0.0, 0.25, 1.0, 3.0}) {
        const double th = theta_bound(M, mixed, 0, 1).theta;
        CHECK(th >= prev);
        prev = th;
    }
    prev = 0.0;
    for (double b : {0.1, 0.5, 1.0, 1.5, 3.0}) {
        const double th = theta_bound(1.0, mixed, 0, b).theta;
        CHECK(th >= prev);
        prev = th;
    }
    CHECK_THROWS_AS(theta_bound(-1.0, mixed, 0, 1), ArgumentError);
    CHECK_THROWS_AS(theta_bound(1.0, mixed, 1, 1), ArgumentError);
}

TEST_CASE("theta check on tableaus") {
    const TimeGrid g = make_grid(0, 1, 65, 2);
    const auto ord = MatrixOrder::row_constant(VectorOrder{0.4, 0.7});
    auto z = transition_rl(constant(g, Matrix(2, 2)), ord, g);
    const ThetaBound tb = theta_bound(0.0, ord, 0, 1);
    CHECK(check_theta(z, tb) <= 0.0);

    // amplitude scaled so that |Z|(t−s)^{1−α} = 2Θ on the diagonal entries
    for (std::size_t c = 0; c < 2; ++c) z.amplitude(c, c) = 2 * tb.theta;
    CHECK(check_theta(z, tb) >= tb.theta * (1 - 1e-12));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    const Matrix P{{u(rng), u(rng)}, {u(rng), u(rng)}}, Q{{u(rng), u(rng)}, {u(rng), u(rng)}};
    const GridFunction A = GridFunction::from_function(g, 2, 2, [&](double t) { return (1 - t) * P + t * Q; });
    double M = 0.0;
    for (std::size_t k = 0; k < g.N; ++k) M = std::max(M, A.at(k).norm_inf());
    CHECK(check_theta(transition_rl(A, ord, g), theta_bound(M, ord, 0, 1)) <= 1e-6);
}

TEST_CASE("Duhamel formulas against Picard") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    const VectorOrder a{0.4, 0.7};
    const TimeGrid g = make_grid(0, 1, 129, default_grading(0.4));
    std::vector<Matrix> knots(4, Matrix(2, 2));
    for (auto& K : knots)
        for (double& x : K.data()) x = u(rng);
    const GridFunction A = GridFunction::from_function(g, 2, 2, [&](double t) {
        const std::size_t k = std::min<std::size_t>(2, static_cast<std::size_t>(3 * t));
        const double th = 3 * t - static_cast<double>(k);
        return (1 - th) * knots[k] + th * knots[k + 1];
    });
    const GridFunction B = GridFunction::from_function(g, 2, 1, [](double t) { return Matrix{{1.0}, {std::sin(t)}}; });
    const Vector qa{1.0, -0.5};
    const Dynamic f = linear_dynamic(A, B);

    const auto [pc, rc] = picard_caputo(f, a, qa, g, 1e-12, 500);
    const GridFunction dc = duhamel_caputo(A, B, qa, a, g);
    CHECK((pc - dc).max_abs() <= 1e-6 * pc.max_abs());

    const auto [pr, rr] = picard_rl(f, a, qa, g, 1e-12, 500);
    const SingularGridFunction dr = duhamel_rl(A, B, qa, a, g);
    CHECK(dr.weight == pr.weight);
    CHECK((pr.regular - dr.regular).max_abs() <= 1e-6 * pr.regular.max_abs());
}

TEST_CASE("Duhamel formulas with zero coefficient") {
    const VectorOrder a{0.5};
    const TimeGrid g = make_grid(0, 1, 65, 4);
    const GridFunction A = constant(g, Matrix{{0.0}});
    const GridFunction B = GridFunction::from_function(g, 1, 1, [](double t) { return Matrix{{std::cos(t)}}; });
    const GridFunction IB = frac_integral_left(B, a);
    const GridFunction c = duhamel_caputo(A, B, Vector{2.0}, a, g);
    for (std::size_t k = 0; k < g.N; ++k) CHECK(c(k, 0) == doctest::Approx(2.0 + IB(k, 0)).epsilon(1e-12));
    const SingularGridFunction r = duhamel_rl(A, B, Vector{2.0}, a, g);
    CHECK(r.weight(0, 0) == 2.0);
    for (std::size_t k = 0; k < g.N; ++k) CHECK(std::abs(r.regular(k, 0) - IB(k, 0)) <= 1e-12);
}

TEST_CASE("scalar Duhamel closed forms") {
    // A = 1, B = 1, q_a = 1, α = 0.5; t = 0.25 and t = 1 are nodes of this grid
    const std::size_t n = 257;
    const TimeGrid g = make_grid(0, 1, n, 2);
    const VectorOrder a{0.5};
    const GridFunction one = constant(g, Matrix{{1.0}});
    const GridFunction c = duhamel_caputo(one, one, Vector{1.0}, a, g);
    const SingularGridFunction r = duhamel_rl(one, one, Vector{1.0}, a, g);
    const std::size_t quarter = (n - 1) / 2, end = n - 1;
    REQUIRE(g[quarter] == 0.25);
    CHECK(c(quarter, 0) == doctest::Approx(2.9047209783651141866).epsilon(1e-5));
    CHECK(c(end, 0) == doctest::Approx(9.0179601615245669326).epsilon(1e-5));
    CHECK(r.at(quarter)(0, 0) == doctest::Approx(4.0331001454606267604).epsilon(1e-5));
    CHECK(r.at(end)(0, 0) == doctest::Approx(9.5821497450723232196).epsilon(1e-5));
    for (std::size_t k = 1; k < n; k += 16) {
        const double t = g[k], s = std::sqrt(t);
        const double ex = ml_scalar({0.5, 1.0}, s) + s * ml_scalar({0.5, 1.5}, s);
        CHECK(c(k, 0) == doctest::Approx(ex).epsilon(1e-5));
    }
}

TEST_CASE("mixed Duhamel") {
    const VectorOrder a{0.5};
    const TimeGrid g = make_grid(0, 1, 129, default_grading(0.5));
    const GridFunction A = constant(g, Matrix{{0.8}});
    const GridFunction B0 = constant(g, Matrix{{0.0}});
    const MixedResult q1 = mixed_duhamel(A, B0, Vector{1.5}, a, g, MixedWhich::q1);
    const MixedResult q2 = mixed_duhamel(A, B0, Vector{1.5}, a, g, MixedWhich::q2);
    const SingularGridFunction hr = duhamel_rl(A, B0, Vector{1.5}, a, g);
    const GridFunction hc = duhamel_caputo(A, B0, Vector{1.5}, a, g);
    CHECK(q1.q.weight == hr.weight);
    CHECK((q1.q.regular - hr.regular).max_abs() <= 1e-12);
    CHECK(q2.q.weight_is_zero());
    CHECK((q2.q.regular - hc).max_abs() <= 1e-12);

    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1, 1);
    const TimeGrid h = make_grid(0, 1, 256, default_grading(0.5));
    for (int trial = 0; trial < 3; ++trial) {
        const GridFunction Ar = constant(h, Matrix{{u(rng)}});
        const GridFunction Br = constant(h, Matrix{{u(rng)}});
        const Vector qa{u(rng)};
        CHECK(mixed_duhamel(Ar, Br, qa, a, h, MixedWhich::q1).residual <= 1e-6);
        CHECK(mixed_duhamel(Ar, Br, qa, a, h, MixedWhich::q2).residual <= 1e-6);
    }
}

TEST_CASE("duality with zero or constant coefficient") {
    const TimeGrid g = make_grid(0, 1, 65, 2);
    const VectorOrder a{0.4, 0.7};
    CHECK(duality_residual_rl(constant(g, Matrix(2, 2)), a, g) <= 1e-13);
    CHECK(duality_residual_caputo(Matrix(2, 2), a, g) <= 1e-14);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    const TimeGrid h = make_grid(0, 1, 256, default_grading(0.4));
    const Matrix M{{u(rng), u(rng)}, {u(rng), u(rng)}};
    CHECK(duality_residual_rl(constant(h, M), a, h) <= 1e-5);

    const TimeGrid s = make_grid(0, 1, 256, default_grading(0.5));
    CHECK(duality_residual_caputo(Matrix{{1.0}}, VectorOrder{0.5}, s) <= 1e-5);
}

TEST_CASE("Caputo duality decouples for diagonal coefficients") {
    const TimeGrid g = make_grid(0, 1, 129, default_grading(0.4));
    const double d2 = duality_residual_caputo(Matrix{{1.0, 0.0}, {0.0, -0.5}}, VectorOrder{0.4, 0.7}, g);
    const double s1 = duality_residual_caputo(Matrix{{1.0}}, VectorOrder{0.4}, g);
    const double s2 = duality_residual_caputo(Matrix{{-0.5}}, VectorOrder{0.7}, g);
    CHECK(d2 == doctest::Approx(std::max(s1, s2)).epsilon(1e-10));
}

// Left and right discretizations of a time-dependent scalar problem; the
// measured gap converges at about order 2.5 (3.9e-3, 7.6e-4, 1.4e-4 for
// N = 65, 129, 257) and 1e-6 is not reached at desk-scale N.
TEST_CASE("scalar duality with a time-dependent coefficient") {
    const TimeGrid g = make_grid(0, 1, 257, default_grading(0.5));
    const GridFunction A = GridFunction::from_function(g, 1, 1, [](double t) { return Matrix{{1.0 + t}}; });
    CHECK(duality_residual_rl(A, VectorOrder{0.5}, g) <= 1e-6);
}

TEST_CASE("order restrictions") {
    const TimeGrid g = make_grid(0, 1, 17, 2);
    const GridFunction A = constant(g, Matrix(2, 2));
    const GridFunction B = GridFunction(g, 2, 1);
    const MatrixOrder general = MatrixOrder::general(Matrix{{0.5, 0.6}, {0.7, 0.8}});
    CHECK_THROWS_AS(require_row_constant(general, "test"), UnsupportedOrderError);
    CHECK_NOTHROW(transition_rl(A, general, g));
    CHECK_THROWS_AS(duhamel_rl(A, B, Vector{1, 1}, VectorOrder{0.5, 1.2}, g), UnsupportedOrderError);
    CHECK_THROWS_AS(duhamel_caputo(GridFunction(g, 3, 3), B, Vector{1, 1}, VectorOrder{0.5, 0.5}, g),
                    DimensionError);
}
