#pragma once

#include "fractus/frac_calculus.hpp"
#include "fractus/multiorder.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace fractus {

struct Dynamic {
    std::size_t m = 1;
    std::function<Vector(const Vector& x, double t)> eval;
    std::optional<double> lipschitz;   // estimated by the solvers when absent
    double bound = 0.0;
    std::function<bool(const Vector& x)> domain_test;   // empty: all of R^m

    bool trivial_domain() const { return !domain_test; }
    bool inside(const Vector& x) const { return !domain_test || domain_test(x); }
};

// f(x,t) = A(t)x + B(t) with A, B interpolated piecewise linearly; L is the
// largest Frobenius norm of A over the nodes.
Dynamic linear_dynamic(const GridFunction& A, const GridFunction& B);

struct SolveReport {
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    std::int64_t bielecki_k = 1;
    double contraction_ell = 0.0;
    double lipschitz = 0.0;
    bool lipschitz_estimated = false;
    std::vector<double> residuals;   // Bielecki distance of each Picard step
};

struct PicardOptions {
    double tol = 1e-10;
    int max_iter = 200;
    // Starting iterate (regular part for R-L); defaults to the constant q_a map
    // for Caputo and to zero for R-L.
    std::optional<GridFunction> initial;
};

// |·| on R^{r×c} is the Euclidean (Frobenius) norm throughout.
double bielecki_norm_l1(const GridFunction& q, double k);
double bielecki_norm_sup(const GridFunction& q, double k);

// Smallest integer k ≥ 1 with ℓ = L Σ k^{−α_i} ≤ 1/2.
std::pair<std::int64_t, double> choose_k(double L, const VectorOrder& a);

// Finite-difference estimate of L on the box of half-width max(1, |q_a|∞)
// around q_a, over the grid's time span.
double estimate_lipschitz(const Dynamic& f, const Vector& q_a, const TimeGrid& grid);

std::pair<SingularGridFunction, SolveReport> picard_rl(const Dynamic& f, const VectorOrder& a,
                                                       const Vector& q_a, const TimeGrid& grid,
                                                       const PicardOptions& opt = {});
std::pair<SingularGridFunction, SolveReport> picard_rl(const Dynamic& f, const VectorOrder& a,
                                                       const Vector& q_a, const TimeGrid& grid, double tol,
                                                       int max_iter);

std::pair<GridFunction, SolveReport> picard_caputo(const Dynamic& f, const VectorOrder& a, const Vector& q_a,
                                                   const TimeGrid& grid, const PicardOptions& opt = {});
std::pair<GridFunction, SolveReport> picard_caputo(const Dynamic& f, const VectorOrder& a, const Vector& q_a,
                                                   const TimeGrid& grid, double tol, int max_iter);

enum class VerdictKind { global, escaped };

struct MaximalVerdict {
    VerdictKind kind = VerdictKind::global;
    std::optional<double> escape_time;
    std::optional<Vector> witness;
    double reached = 0.0;   // right end of the last accepted window
};

struct ExtendOptions {
    double a = 0.0;
    std::size_t n = 256;
    double grading = 0.0;   // 0: default_grading(min α)
    double tol = 1e-10;
    int max_iter = 2000;
    int windows = 16;
    int max_halvings = 10;
};

std::pair<GridFunction, MaximalVerdict> extend_maximal(const Dynamic& f, const VectorOrder& a, const Vector& q_a,
                                                       double compact_radius, double b_max,
                                                       const ExtendOptions& opt = {});

} // namespace fractus
