#include "fractus/frac_calculus.hpp"

#include "fractus/errors.hpp"
#include "fractus/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace fractus {

// ---- grids ----------------------------------------------------------------

TimeGrid make_grid(double a, double b, std::size_t N, double grading) {
    if (!(std::isfinite(a) && std::isfinite(b) && b > a))
        throw ArgumentError("make_grid: need finite a < b");
    if (N < 2) throw ArgumentError("make_grid: need at least 2 nodes");
    if (!(grading >= 1.0) || !std::isfinite(grading)) throw ArgumentError("make_grid: grading must be >= 1");
    TimeGrid g;
    g.a = a;
    g.b = b;
    g.N = N;
    g.grading = grading;
    g.nodes.resize(N);
    const double L = b - a;
    for (std::size_t k = 0; k < N; ++k)
        g.nodes[k] = a + L * std::pow(static_cast<double>(k) / static_cast<double>(N - 1), grading);
    g.nodes.back() = b;
    for (std::size_t k = 1; k < N; ++k)
        if (!(g.nodes[k] > g.nodes[k - 1]))
            throw ArgumentError("make_grid: nodes collapse (N or grading too large for the interval)");
    return g;
}

TimeGrid reflect(const TimeGrid& g) {
    TimeGrid r = g;
    r.dense_right = !g.dense_right;
    for (std::size_t k = 0; k < g.N; ++k) r.nodes[k] = g.a + g.b - g.nodes[g.N - 1 - k];
    r.nodes.front() = g.a;
    r.nodes.back() = g.b;
    return r;
}

double TimeGrid::jacobian(std::size_t k) const {
    const double n1 = static_cast<double>(N - 1);
    const double x = dense_right ? (n1 - static_cast<double>(k)) / n1 : static_cast<double>(k) / n1;
    if (grading == 1.0) return (b - a) / n1;
    return (b - a) * grading / n1 * std::pow(x, grading - 1.0);
}

bool TimeGrid::same_as(const TimeGrid& o) const {
    return N == o.N && a == o.a && b == o.b && nodes == o.nodes;
}

double default_grading(double min_order) { return std::clamp(2.0 / min_order, 1.0, 4.0); }

// ---- grid functions --------------------------------------------------------

GridFunction::GridFunction(TimeGrid grid, std::size_t rows, std::size_t cols, double fill)
    : grid_(std::move(grid)), rows_(rows), cols_(cols), samples_(grid_.N * rows * cols, fill) {
    if (rows == 0 || cols == 0) throw DimensionError("grid function shape must be positive");
}

GridFunction GridFunction::from_vectors(const TimeGrid& grid, const std::vector<Vector>& values) {
    if (values.size() != grid.N) throw DimensionError("from_vectors: one sample per node required");
    GridFunction g(grid, values.front().size(), 1);
    for (std::size_t k = 0; k < grid.N; ++k) g.set(k, values[k]);
    return g;
}

Matrix GridFunction::at(std::size_t k) const {
    Matrix m(rows_, cols_);
    std::copy_n(samples_.begin() + static_cast<long>(k * stride()), stride(), m.data().begin());
    return m;
}

Vector GridFunction::vec(std::size_t k) const {
    Vector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(k, i, 0);
    return v;
}

void GridFunction::set(std::size_t k, const Matrix& v) {
    if (v.rows() != rows_ || v.cols() != cols_) throw DimensionError("GridFunction::set: shape mismatch");
    std::copy(v.data().begin(), v.data().end(), samples_.begin() + static_cast<long>(k * stride()));
}

void GridFunction::set(std::size_t k, const Vector& v) {
    if (v.size() != rows_ || cols_ != 1) throw DimensionError("GridFunction::set: shape mismatch");
    std::copy(v.begin(), v.end(), samples_.begin() + static_cast<long>(k * stride()));
}

Matrix GridFunction::interpolate(double t) const {
    const auto& x = grid_.nodes;
    if (t < x.front() || t > x.back()) throw ArgumentError("interpolate: time outside the grid");
    std::size_t k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
    if (k >= x.size()) return at(x.size() - 1);
    if (k == 0) return at(0);
    const double th = (t - x[k - 1]) / (x[k] - x[k - 1]);
    Matrix m(rows_, cols_);
    for (std::size_t e = 0; e < stride(); ++e)
        m.data()[e] = (1.0 - th) * samples_[(k - 1) * stride() + e] + th * samples_[k * stride() + e];
    return m;
}

static void check_same(const GridFunction& a, const GridFunction& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.size() != b.size())
        throw DimensionError("grid function shape mismatch");
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    check_same(*this, o);
    for (std::size_t e = 0; e < samples_.size(); ++e) samples_[e] += o.samples_[e];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
    check_same(*this, o);
    for (std::size_t e = 0; e < samples_.size(); ++e) samples_[e] -= o.samples_[e];
    return *this;
}

GridFunction& GridFunction::operator*=(double s) {
    for (double& x : samples_) x *= s;
    return *this;
}

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double x : samples_) m = std::max(m, std::abs(x));
    return m;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }

Matrix SingularGridFunction::singular_at(std::size_t k) const {
    Matrix s(weight.rows(), weight.cols());
    const double dt = grid()[k] - grid().a;
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j) {
            const double w = weight(i, j);
            if (w == 0.0) continue;
            const double al = orders(i, j);
            s(i, j) = w * std::pow(dt, al - 1.0) / std::tgamma(al);
        }
    return s;
}

Matrix SingularGridFunction::at(std::size_t k) const { return singular_at(k) + regular.at(k); }

Matrix entrywise_orders(const VectorOrder& a, std::size_t rows, std::size_t cols) {
    if (a.size() != rows)
        throw DimensionError("order vector has " + std::to_string(a.size()) + " entries, function has " +
                             std::to_string(rows) + " rows");
    Matrix o(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) o(i, j) = a[i];
    return o;
}

// ---- integrals --------------------------------------------------------------

namespace {

void check_integral_orders(const Matrix& orders, bool allow_zero) {
    for (double x : orders.data())
        if (!((allow_zero ? x >= 0.0 : x > 0.0) && x <= 1.0))
            throw UnsupportedOrderError("integral order " + std::to_string(x) + " out of (0,1]");
}

GridFunction integrate_left(const GridFunction& q, const Matrix& orders) {
    if (orders.rows() != q.rows() || orders.cols() != q.cols())
        throw DimensionError("order shape does not match the grid function");
    const auto& tau = q.grid().nodes;
    std::map<double, quad::LowerTable> tables;
    GridFunction out(q.grid(), q.rows(), q.cols());
    for (std::size_t i = 0; i < q.rows(); ++i)
        for (std::size_t j = 0; j < q.cols(); ++j) {
            const double al = orders(i, j);
            if (al == 0.0) {
                for (std::size_t n = 0; n < q.size(); ++n) out(n, i, j) = q(n, i, j);
                continue;
            }
            auto it = tables.find(al);
            if (it == tables.end()) it = tables.emplace(al, quad::plain_table(tau, al)).first;
            const auto& T = it->second;
            for (std::size_t n = 1; n < q.size(); ++n) {
                const double* w = T.row(n);
                double s = 0.0;
                for (std::size_t k = 0; k <= n; ++k) s += w[k] * q(k, i, j);
                out(n, i, j) = s;
            }
        }
    return out;
}

GridFunction integrate_left_singular(const SingularGridFunction& q, const Matrix& orders) {
    GridFunction out = integrate_left(q.regular, orders);
    // I^α[(τ−a)^{β−1}/Γ(β)] = (t−a)^{α+β−1}/Γ(α+β)
    const auto& g = q.grid();
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) {
            const double w = q.weight(i, j);
            if (w == 0.0) continue;
            const double e = orders(i, j) + q.orders(i, j);
            const double c = w / std::tgamma(e);
            for (std::size_t n = 1; n < out.size(); ++n) out(n, i, j) += c * std::pow(g[n] - g.a, e - 1.0);
            if (std::abs(e - 1.0) < 1e-12) out(0, i, j) += w;
            else if (e < 1.0) out(0, i, j) += w * HUGE_VAL;
        }
    return out;
}

Matrix square_orders(const MatrixOrder& a, const GridFunction& q) {
    if (a.size() != q.rows() || a.size() != q.cols())
        throw DimensionError("matrix order needs a square grid function of the same size");
    return a.values;
}

} // namespace

GridFunction frac_integral_left_entrywise(const GridFunction& q, const Matrix& orders) {
    check_integral_orders(orders, true);
    return integrate_left(q, orders);
}

GridFunction frac_integral_left(const GridFunction& q, const VectorOrder& a) {
    const Matrix o = entrywise_orders(a, q.rows(), q.cols());
    check_integral_orders(o, false);
    return integrate_left(q, o);
}

GridFunction frac_integral_left(const GridFunction& q, const MatrixOrder& a) {
    const Matrix o = square_orders(a, q);
    check_integral_orders(o, false);
    return integrate_left(q, o);
}

GridFunction frac_integral_left(const SingularGridFunction& q, const VectorOrder& a) {
    const Matrix o = entrywise_orders(a, q.regular.rows(), q.regular.cols());
    check_integral_orders(o, false);
    return integrate_left_singular(q, o);
}

GridFunction frac_integral_left(const SingularGridFunction& q, const MatrixOrder& a) {
    const Matrix o = square_orders(a, q.regular);
    check_integral_orders(o, false);
    return integrate_left_singular(q, o);
}

GridFunction reflect(const GridFunction& q) {
    GridFunction r(reflect(q.grid()), q.rows(), q.cols());
    const std::size_t N = q.size();
    for (std::size_t k = 0; k < N; ++k) r.set(k, q.at(N - 1 - k));
    return r;
}

namespace {

// Maps a result computed on the reflected grid back onto the original one.
GridFunction unreflect(const GridFunction& r, const TimeGrid& original) {
    GridFunction out(original, r.rows(), r.cols());
    const std::size_t N = r.size();
    for (std::size_t k = 0; k < N; ++k) out.set(k, r.at(N - 1 - k));
    return out;
}

} // namespace

GridFunction frac_integral_right(const GridFunction& q, const VectorOrder& a) {
    return unreflect(frac_integral_left(reflect(q), a), q.grid());
}

GridFunction frac_integral_right(const GridFunction& q, const MatrixOrder& a) {
    return unreflect(frac_integral_left(reflect(q), a), q.grid());
}

// ---- derivatives -------------------------------------------------------------

namespace {

// d/dt by centred differences in the grid's uniform index coordinate, divided by
// the exact mapping Jacobian; one-sided quotients at the two ends.
GridFunction differentiate(const GridFunction& F) {
    const auto& g = F.grid();
    const std::size_t N = g.N;
    GridFunction d(g, F.rows(), F.cols());
    for (std::size_t e = 0; e < F.stride(); ++e) {
        const auto val = [&](std::size_t k) { return F.samples()[k * F.stride() + e]; };
        auto& out = d.samples();
        out[e] = (val(1) - val(0)) / (g[1] - g[0]);
        out[(N - 1) * F.stride() + e] = (val(N - 1) - val(N - 2)) / (g[N - 1] - g[N - 2]);
        for (std::size_t k = 1; k + 1 < N; ++k)
            out[k * F.stride() + e] = 0.5 * (val(k + 1) - val(k - 1)) / g.jacobian(k);
    }
    return d;
}

GridFunction rl_left_impl(const GridFunction& q, const VectorOrder& a) {
    if (q.size() < 3) throw GridTooCoarseError("fractional derivative needs at least 3 nodes");
    Matrix comp = entrywise_orders(a, q.rows(), q.cols());
    for (double& x : comp.data()) x = 1.0 - x;
    return differentiate(integrate_left(q, comp));
}

GridFunction minus_initial(const GridFunction& q) {
    GridFunction r = q;
    for (std::size_t k = 0; k < q.size(); ++k)
        for (std::size_t e = 0; e < q.stride(); ++e) r.samples()[k * q.stride() + e] -= q.samples()[e];
    return r;
}

} // namespace

GridFunction rl_derivative_left(const GridFunction& q, const VectorOrder& a) { return rl_left_impl(q, a); }

GridFunction caputo_derivative_left(const GridFunction& q, const VectorOrder& a) {
    if (q.size() < 3) throw GridTooCoarseError("fractional derivative needs at least 3 nodes");
    return rl_left_impl(minus_initial(q), a);
}

// In the reflected variable s = a+b−t the right operators become left ones and
// the "−d/dt" of the right R-L derivative becomes +d/ds.
GridFunction rl_derivative_right(const GridFunction& q, const VectorOrder& a) {
    return unreflect(rl_derivative_left(reflect(q), a), q.grid());
}

GridFunction caputo_derivative_right(const GridFunction& q, const VectorOrder& a) {
    return unreflect(caputo_derivative_left(reflect(q), a), q.grid());
}

} // namespace fractus
