#pragma once

#include "fractus/multiorder.hpp"

#include <cstddef>
#include <vector>

namespace fractus {

// Nodes t_k = a + (b−a)(k/(N−1))^grading, clustered at a. A reflected grid is
// clustered at b instead (dense_right).
struct TimeGrid {
    double a = 0.0, b = 1.0;
    std::size_t N = 0;
    double grading = 1.0;
    bool dense_right = false;
    std::vector<double> nodes;

    std::size_t size() const { return N; }
    double operator[](std::size_t k) const { return nodes[k]; }
    // dt/dξ at ξ = k, where ξ is the uniform index coordinate of the mapping.
    double jacobian(std::size_t k) const;
    bool same_as(const TimeGrid& o) const;
};

TimeGrid make_grid(double a, double b, std::size_t N, double grading);
TimeGrid reflect(const TimeGrid& g);

// 2/min(α) capped at 4, never below 1.
double default_grading(double min_order);

class GridFunction {
public:
    GridFunction() = default;
    GridFunction(TimeGrid grid, std::size_t rows, std::size_t cols, double fill = 0.0);

    static GridFunction from_function(const TimeGrid& grid, std::size_t rows, std::size_t cols,
                                      const auto& fn) {
        GridFunction g(grid, rows, cols);
        for (std::size_t k = 0; k < grid.N; ++k) g.set(k, fn(grid.nodes[k]));
        return g;
    }
    static GridFunction from_vectors(const TimeGrid& grid, const std::vector<Vector>& values);

    const TimeGrid& grid() const { return grid_; }
    std::size_t size() const { return grid_.N; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t stride() const { return rows_ * cols_; }

    double& operator()(std::size_t k, std::size_t i, std::size_t j = 0) {
        return samples_[k * stride() + i * cols_ + j];
    }
    double operator()(std::size_t k, std::size_t i, std::size_t j = 0) const {
        return samples_[k * stride() + i * cols_ + j];
    }

    Matrix at(std::size_t k) const;
    Vector vec(std::size_t k) const;   // column 0 of sample k
    void set(std::size_t k, const Matrix& v);
    void set(std::size_t k, const Vector& v);
    void set(std::size_t k, double v) { set(k, Vector{v}); }

    // Piecewise-linear interpolation, t must lie in [a,b].
    Matrix interpolate(double t) const;

    const std::vector<double>& samples() const { return samples_; }
    std::vector<double>& samples() { return samples_; }

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(double s);
    double max_abs() const;

private:
    TimeGrid grid_;
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> samples_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);

// q(t) = [(t−a)^{order−1}/Γ(order)] ⊗ weight + regular(t). The singular term is
// never sampled at t = a; regular(a) is finite by construction.
struct SingularGridFunction {
    Matrix orders;       // entrywise order of the singular term, shape of q
    Matrix weight;
    GridFunction regular;

    const TimeGrid& grid() const { return regular.grid(); }
    // Singular term alone at node k ≥ 1.
    Matrix singular_at(std::size_t k) const;
    // Full value at node k ≥ 1 (or at k = 0 when the weight vanishes).
    Matrix at(std::size_t k) const;
    bool weight_is_zero() const { return weight.max_abs() == 0.0; }
};

// Order matrix matching q's shape: row i gets α_i.
Matrix entrywise_orders(const VectorOrder& a, std::size_t rows, std::size_t cols);

GridFunction frac_integral_left(const GridFunction& q, const VectorOrder& a);
GridFunction frac_integral_left(const GridFunction& q, const MatrixOrder& a);
GridFunction frac_integral_left(const SingularGridFunction& q, const VectorOrder& a);
GridFunction frac_integral_left(const SingularGridFunction& q, const MatrixOrder& a);
// Entrywise orders in [0,1]; a zero entry takes the identity path I^0[q] = q.
GridFunction frac_integral_left_entrywise(const GridFunction& q, const Matrix& orders);

GridFunction frac_integral_right(const GridFunction& q, const VectorOrder& a);
GridFunction frac_integral_right(const GridFunction& q, const MatrixOrder& a);

GridFunction rl_derivative_left(const GridFunction& q, const VectorOrder& a);
GridFunction caputo_derivative_left(const GridFunction& q, const VectorOrder& a);
GridFunction rl_derivative_right(const GridFunction& q, const VectorOrder& a);
GridFunction caputo_derivative_right(const GridFunction& q, const VectorOrder& a);

// Values at reflected nodes: result(k) = q(N−1−k) on reflect(q.grid()).
GridFunction reflect(const GridFunction& q);

} // namespace fractus
