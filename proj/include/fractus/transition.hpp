#pragma once

#include "fractus/frac_calculus.hpp"
#include "fractus/multiorder.hpp"

#include <cstddef>
#include <vector>

namespace fractus {

enum class TransitionKind { rl, caputo };

// Lower-triangular array of m×m blocks for source nodes s = t_j and times
// t = t_i ≥ t_j.
//
// rl: Z(t,s) = [(t−s)^{α−1}/Γ(α)] ⊗ amplitude + regular block; the stored
//     regular block at i = j is 0 by convention (the integral over an empty
//     interval).
// caputo: cZ(t,s) = block, with cZ(t_j,t_j) = Id.
//
// `moments` hold ∫ kernel(t_i,s) φ_j(s) ds for the hat functions φ_j of the
// grid, solved with the same discrete operators as the Picard solvers. They
// are filled for row-constant orders and drive the Duhamel sums.
struct TransitionTableau {
    TimeGrid grid;
    std::size_t m = 0;
    TransitionKind kind = TransitionKind::rl;
    MatrixOrder order;
    Matrix amplitude;   // rl: diag(1/Γ(α_cc)); caputo: zero
    std::vector<Matrix> blocks;
    std::vector<Matrix> moments;
    // Column s = a solved directly on the grid (equal to column 0 of blocks up
    // to rounding); used by the Duhamel formulas.
    std::vector<Matrix> source_column;

    static std::size_t index(std::size_t i, std::size_t j) { return i * (i + 1) / 2 + j; }
    const Matrix& regular(std::size_t i, std::size_t j) const { return blocks[index(i, j)]; }
    const Matrix& moment(std::size_t i, std::size_t j) const { return moments[index(i, j)]; }
    // Full value, i > j for rl.
    Matrix full(std::size_t i, std::size_t j) const;
};

struct TransitionOptions {
    double tol = 1e-10;
    // Each column is solved on its own graded mesh over [t_j, b] with
    // refine·(N−1)+1 nodes, then evaluated at the shared nodes.
    std::size_t refine = 1;
    // Grading exponent of the local meshes.
    double local_grading = 3.0;
    // Richardson extrapolation from a second solve on the twice-refined mesh.
    bool extrapolate = true;
    bool with_moments = true;
};

TransitionTableau transition_rl(const GridFunction& A, const MatrixOrder& a, const TimeGrid& grid, double tol = 1e-10);
TransitionTableau transition_caputo(const GridFunction& A, const MatrixOrder& a, const TimeGrid& grid,
                                    double tol = 1e-10);
TransitionTableau transition_build(const GridFunction& A, const MatrixOrder& a, const TimeGrid& grid,
                                   TransitionKind kind, const TransitionOptions& opt);

struct ThetaBound {
    double theta = 0.0;
    double b = 0.0;
    int terms_used = 0;
    double M = 0.0;
    double beta_min = 0.0, gamma_max = 0.0, delta = 0.0;
};

ThetaBound theta_bound(double M, const MatrixOrder& a, double t0, double t1);
// max over i > j and entries of |Z_rc(t_i,t_j)|·(t_i−t_j)^{1−α_rc} − Θ.
double check_theta(const TransitionTableau& tab, const ThetaBound& bound);

SingularGridFunction duhamel_rl(const GridFunction& A, const GridFunction& B, const Vector& q_a,
                                const VectorOrder& a, const TimeGrid& grid, double tol = 1e-10);
GridFunction duhamel_caputo(const GridFunction& A, const GridFunction& B, const Vector& q_a,
                            const VectorOrder& a, const TimeGrid& grid, double tol = 1e-10);

enum class MixedWhich { q1, q2 };

struct MixedResult {
    SingularGridFunction q;   // q2 has zero weight
    // max node defect of the associated integral representation with forcing
    // I^{1−α}[B]
    double residual = 0.0;
};

MixedResult mixed_duhamel(const GridFunction& A, const GridFunction& B, const Vector& q_a, const VectorOrder& a,
                          const TimeGrid& grid, MixedWhich which, double tol = 1e-10);

double duality_residual_rl(const GridFunction& A, const VectorOrder& a, const TimeGrid& grid, double tol = 1e-10);
double duality_residual_caputo(const Matrix& A, const VectorOrder& a, const TimeGrid& grid, double tol = 1e-10);

// Checks that an order is row-constant and returns the underlying vector.
VectorOrder require_row_constant(const MatrixOrder& a, const char* who);

} // namespace fractus
