#pragma once

// Product-trapezoid weights: the piecewise-linear interpolant of the data is
// integrated exactly against the weakly singular kernel.

#include <cstddef>
#include <vector>

namespace fractus::quad {

// Weights w[0..n] with ∫_{τ0}^{t} (t−τ)^{α−1}/Γ(α) p(τ) dτ = Σ w_k p(τ_k), for t in
// (τ_{n−1}, τ_n]. When t < τ_n the last interval is truncated at t but the
// interpolant still uses the values at τ_{n−1} and τ_n.
void plain_row(const double* tau, std::size_t n, double t, double alpha, double* w);

// Same with the extra factor (τ−τ0)^σ, σ > −1, integrated exactly.
void weighted_row(const double* tau, std::size_t n, double t, double alpha, double sigma, double* w);

// P0 = ∫_{u0}^{u1} u^σ (1−u)^{α−1} du and Q = ∫_{u0}^{u1} u^σ (1−u)^{α−1} (u−u0) du,
// 0 ≤ u0 < u1 ≤ 1.
void beta_moments(double alpha, double sigma, double u0, double u1, double& P0, double& Q);

// Packed lower-triangular table: row i holds the weights for t = τ_i.
class LowerTable {
public:
    LowerTable() = default;
    explicit LowerTable(std::size_t n) : n_(n), w_(n * (n + 1) / 2, 0.0) {}
    std::size_t size() const { return n_; }
    double* row(std::size_t i) { return w_.data() + i * (i + 1) / 2; }
    const double* row(std::size_t i) const { return w_.data() + i * (i + 1) / 2; }
    void scale(double s) {
        for (double& x : w_) x *= s;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> w_;
};

LowerTable plain_table(const std::vector<double>& tau, double alpha);
LowerTable weighted_table(const std::vector<double>& tau, double alpha, double sigma);

} // namespace fractus::quad
