#include "fractus/multiorder.hpp"

#include "fractus/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace fractus {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    if (rows_ == 0 || cols_ == 0) throw DimensionError("matrix dimensions must be positive");
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionError("ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t m) {
    Matrix id(m, m);
    for (std::size_t i = 0; i < m; ++i) id(i, i) = 1.0;
    return id;
}

Matrix Matrix::ones(std::size_t rows, std::size_t cols) { return Matrix(rows, cols, 1.0); }

Matrix Matrix::column(const Vector& v) {
    Matrix c(v.size(), 1);
    std::copy(v.begin(), v.end(), c.data_.begin());
    return c;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
}

double Matrix::norm_inf() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
        m = std::max(m, s);
    }
    return m;
}

double Matrix::frobenius() const {
    double s = 0.0;
    for (double x : data_) s += x * x;
    return std::sqrt(s);
}

static void same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
}

Matrix& Matrix::operator+=(const Matrix& o) {
    same_shape(*this, o, "add");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    same_shape(*this, o, "subtract");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Vector operator*(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) throw DimensionError("matvec: dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
    return y;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    same_shape(a, b, "hadamard");
    Matrix c = a;
    for (std::size_t k = 0; k < c.data().size(); ++k) c.data()[k] *= b.data()[k];
    return c;
}

Matrix row_lift(const Vector& v) {
    const std::size_t m = v.size();
    Matrix r(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) r(i, j) = v[i];
    return r;
}

Matrix col_lift(const Vector& v) { return row_lift(v).transpose(); }

Vector solve(Matrix a, Vector rhs) {
    const std::size_t n = a.rows();
    if (!a.square() || rhs.size() != n) throw DimensionError("solve: shape mismatch");
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
        if (a(p, c) == 0.0 || !std::isfinite(a(p, c))) throw DomainError("solve: singular matrix");
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(p, j), a(c, j));
            std::swap(rhs[p], rhs[c]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a(r, c) / a(c, c);
            if (f == 0.0) continue;
            for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
            rhs[r] -= f * rhs[c];
        }
    }
    for (std::size_t c = n; c-- > 0;) {
        double s = rhs[c];
        for (std::size_t j = c + 1; j < n; ++j) s -= a(c, j) * rhs[j];
        rhs[c] = s / a(c, c);
    }
    return rhs;
}

static void check_order_entry(double x) {
    if (!(x > 0.0 && x <= 1.0))
        throw UnsupportedOrderError("fractional order " + std::to_string(x) + " out of (0,1]");
}

VectorOrder::VectorOrder(Vector v) : values(std::move(v)) {
    if (values.empty()) throw DimensionError("order vector must be non-empty");
    for (double x : values) check_order_entry(x);
}

double VectorOrder::min() const { return *std::min_element(values.begin(), values.end()); }
double VectorOrder::max() const { return *std::max_element(values.begin(), values.end()); }

MatrixOrder MatrixOrder::general(const Matrix& values) {
    if (!values.square()) throw DimensionError("matrix order must be square");
    for (double x : values.data()) check_order_entry(x);
    return {values, OrderTag::general, {}};
}

MatrixOrder MatrixOrder::row_constant(const VectorOrder& v) {
    return {row_lift(v.values), OrderTag::row_constant, v.values};
}

MatrixOrder MatrixOrder::col_constant(const VectorOrder& v) {
    return {col_lift(v.values), OrderTag::col_constant, v.values};
}

MatrixOrder MatrixOrder::transpose() const {
    OrderTag t = tag;
    if (tag == OrderTag::row_constant) t = OrderTag::col_constant;
    else if (tag == OrderTag::col_constant) t = OrderTag::row_constant;
    return {values.transpose(), t, source};
}

double MatrixOrder::min() const {
    return *std::min_element(values.data().begin(), values.data().end());
}
double MatrixOrder::max() const {
    return *std::max_element(values.data().begin(), values.data().end());
}

} // namespace fractus
