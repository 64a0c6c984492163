#pragma once

#include "fractus/cauchy_solver.hpp"
#include "fractus/expr.hpp"
#include "fractus/frac_calculus.hpp"
#include "fractus/multiorder.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fractus {

enum class ProblemKind { rl, caputo };

// Problem file: `key = value` lines under [problem], [dynamics], [solver]
// and [domain]; '#' starts a comment.
struct ProblemSpec {
    ProblemKind kind = ProblemKind::caputo;
    std::size_t m = 1;
    VectorOrder alpha;
    double a = 0.0, b = 1.0;
    Vector qa;
    std::size_t n = 256;
    double grading = 0.0;   // 0: default_grading(min α)
    double tol = 1e-10;
    int max_iter = 200;
    std::optional<double> lipschitz;
    std::optional<double> ball_radius;

    bool linear = false;
    std::vector<Expr> f;   // nonlinear: f1..fm in (x1..xm, t)
    std::vector<Expr> A;   // linear: row-major A11..Amm in t
    std::vector<Expr> B;   // linear: B1..Bm in t

    TimeGrid grid() const;
    Dynamic dynamic() const;
    // Linear coefficients sampled on a grid.
    GridFunction sample_A(const TimeGrid& g) const;
    GridFunction sample_B(const TimeGrid& g) const;
};

ProblemSpec parse_problem(const std::string& text);
ProblemSpec load_problem(const std::string& path);
// Re-checks the invariants after command-line overrides.
void validate_problem(const ProblemSpec& p);

} // namespace fractus
