#pragma once

#include "fractus/multiorder.hpp"

namespace fractus {

// Γ(x) for x > 0.
double gamma(double x);

struct MLParams {
    double alpha = 1.0;
    double beta = 1.0;
};

// Largest |z| (resp. ‖scale·M‖∞) the series evaluation accepts.
inline constexpr double ml_z_max = 50.0;
inline constexpr int ml_max_terms = 10000;

// Two-parameter Mittag-Leffler function by direct summation.
double ml_scalar(const MLParams& p, double z);

// Σ_k (scale·M)^k / Γ(αk+β).
Matrix ml_matrix(const MLParams& p, const Matrix& M, double scale);

} // namespace fractus
