#include "fractus/errors.hpp"
#include "fractus/multiorder.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fractus;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Matrix m(r, c);
    for (double& x : m.data()) x = u(rng);
    return m;
}

double rel(const Matrix& a, const Matrix& b) {
    return (a - b).max_abs() / std::max(1.0, b.max_abs());
}

} // namespace

TEST_CASE("hadamard by definition") {
    const Matrix a{{1, 2}, {3, 4}}, b{{5, 6}, {7, 8}};
    CHECK(hadamard(a, b) == Matrix{{5, 12}, {21, 32}});
    CHECK(hadamard(a, Matrix::ones(2, 2)) == a);
    CHECK_THROWS_AS(hadamard(a, Matrix(3, 2)), DimensionError);
}

TEST_CASE("hadamard commutes") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        const Matrix a = random_matrix(rng, 3, 3), b = random_matrix(rng, 3, 3);
        CHECK(hadamard(a, b) == hadamard(b, a));
    }
}

TEST_CASE("lifts") {
    const Vector v{1, 2};
    CHECK(row_lift(v) == Matrix{{1, 1}, {2, 2}});
    CHECK(col_lift(v) == Matrix{{1, 2}, {1, 2}});
    CHECK(row_lift(v).transpose() == col_lift(v));
    CHECK(row_lift(Vector{0.3, 0.3, 0.3}) == 0.3 * Matrix::ones(3, 3));
    CHECK(col_lift(Vector{0.7}) == Matrix{{0.7}});
    const Matrix id = Matrix::identity(2);
    CHECK(hadamard(col_lift(v), id) == hadamard(row_lift(v), id));
}

TEST_CASE("order validation") {
    CHECK_NOTHROW(VectorOrder{0.5, 1.0});
    CHECK_THROWS_AS(VectorOrder{0.0}, UnsupportedOrderError);
    CHECK_THROWS_AS(VectorOrder{1.5}, UnsupportedOrderError);
    CHECK_THROWS_AS(VectorOrder(Vector{}), DimensionError);
    CHECK_THROWS_AS(MatrixOrder::general(Matrix{{0.5, 1.2}, {0.3, 0.4}}), UnsupportedOrderError);
    CHECK_THROWS_AS(MatrixOrder::general(Matrix(2, 3, 0.5)), DimensionError);
}

TEST_CASE("matrix order tags") {
    const VectorOrder v{0.2, 0.9};
    const MatrixOrder r = MatrixOrder::row_constant(v);
    const MatrixOrder c = MatrixOrder::col_constant(v);
    CHECK(r.tag == OrderTag::row_constant);
    CHECK(r(1, 0) == 0.9);
    CHECK(c(1, 0) == 0.2);
    CHECK(r.transpose().tag == OrderTag::col_constant);
    CHECK(r.transpose().values == c.values);
    CHECK(r.min() == 0.2);
    CHECK(r.max() == 0.9);
}

// The four identities relating ⊗ to transposition and lifts, checked on
// random m = 4 instances.
TEST_CASE("hadamard product identities") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int k = 0; k < 100; ++k) {
        const Matrix A = random_matrix(rng, 4, 4), B = random_matrix(rng, 4, 4), C = random_matrix(rng, 4, 4);
        Vector v(4), w(4);
        for (auto& x : v) x = u(rng);
        for (auto& x : w) x = u(rng);
        const Matrix id = Matrix::identity(4);
        // (A ⊗ B)ᵀ = Aᵀ ⊗ Bᵀ
        CHECK(rel(hadamard(A, B).transpose(), hadamard(A.transpose(), B.transpose())) <= 1e-14);
        // row_lift(v) ⊗ Id = col_lift(v) ⊗ Id
        CHECK(rel(hadamard(row_lift(v), id), hadamard(col_lift(v), id)) <= 1e-14);
        // (row_lift(v) ⊗ A) × B = row_lift(v) ⊗ (A × B)
        CHECK(rel(hadamard(row_lift(v), A) * B, hadamard(row_lift(v), A * B)) <= 1e-14);
        // A × (col_lift(w) ⊗ B) = col_lift(w) ⊗ (A × B)
        CHECK(rel(A * hadamard(col_lift(w), B), hadamard(col_lift(w), A * B)) <= 1e-14);
        // distributivity over +
        CHECK(rel(hadamard(A, B + C), hadamard(A, B) + hadamard(A, C)) <= 1e-14);
    }
}

TEST_CASE("linear solve") {
    const Matrix a{{4, 1}, {2, 3}};
    const Vector x = solve(a, Vector{1, 2});
    CHECK(x[0] == doctest::Approx(0.1));
    CHECK(x[1] == doctest::Approx(0.6));
    CHECK_THROWS(solve(Matrix{{1, 2}, {2, 4}}, Vector{1, 1}));
}
