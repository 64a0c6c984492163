#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace fractus {

using Vector = std::vector<double>;

// Dense row-major matrix. m stays small (a handful) everywhere in the library.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t m);
    static Matrix ones(std::size_t rows, std::size_t cols);
    static Matrix column(const Vector& v);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    Matrix transpose() const;
    double max_abs() const;
    double norm_inf() const;   // max row sum
    double frobenius() const;

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s);

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);

Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix row_lift(const Vector& v);
Matrix col_lift(const Vector& v);

// Solves a x = rhs by partial-pivot elimination; throws DomainError if singular.
Vector solve(Matrix a, Vector rhs);

struct VectorOrder {
    Vector values;

    VectorOrder() = default;
    explicit VectorOrder(Vector v);
    VectorOrder(std::initializer_list<double> v) : VectorOrder(Vector(v)) {}

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double min() const;
    double max() const;
};

enum class OrderTag { general, row_constant, col_constant };

struct MatrixOrder {
    Matrix values;
    OrderTag tag = OrderTag::general;
    Vector source;   // the lifted vector for row/col constant orders

    static MatrixOrder general(const Matrix& values);
    static MatrixOrder row_constant(const VectorOrder& v);
    static MatrixOrder col_constant(const VectorOrder& v);

    std::size_t size() const { return values.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
    MatrixOrder transpose() const;
    double min() const;
    double max() const;
};

} // namespace fractus
