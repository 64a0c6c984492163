#include "fractus/special_functions.hpp"

#include "fractus/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <string>

namespace fractus {

namespace {

void check_params(const MLParams& p) {
    if (!(p.alpha > 0.0) || !(p.beta > 0.0))
        throw DomainError("Mittag-Leffler parameters must be positive");
}

double inv_gamma(double x) {
    if (x < 170.0) return 1.0 / std::tgamma(x);
    return std::exp(-std::lgamma(x));
}

// |z^k / Γ(αk+β)| in log form, used to locate the largest term.
double log_term(const MLParams& p, double z, int k) {
    return k * std::log(std::abs(z)) - std::lgamma(p.alpha * k + p.beta);
}

// Summation with the truncation rule shared by the scalar paths: stop once the
// terms are past their peak and the geometric tail bound drops below 1e-16 of
// the running sum.
template <class Real, class TermFn>
Real sum_series(TermFn term) {
    Real sum = 0;
    double prev = 0.0;
    for (int k = 0; k < ml_max_terms; ++k) {
        Real t = term(k);
        sum += t;
        const double at = std::abs(static_cast<double>(t));
        const double as = std::abs(static_cast<double>(sum));
        if (k > 0 && at < prev) {
            const double r = at / prev;
            const double tail = r < 1.0 ? at * r / (1.0 - r) : HUGE_VAL;
            if (tail <= 1e-16 * as || (at == 0.0 && prev == 0.0)) return sum;
        }
        if (k > 0 && at == 0.0 && as == 0.0) return sum;
        prev = at;
    }
    throw ConvergenceError("Mittag-Leffler series did not converge within " +
                               std::to_string(ml_max_terms) + " terms",
                           prev);
}

} // namespace

double gamma(double x) {
    if (!(x > 0.0)) throw DomainError("gamma: argument must be positive, got " + std::to_string(x));
    return std::tgamma(x);
}

double ml_scalar(const MLParams& p, double z) {
    check_params(p);
    if (!(std::abs(z) <= ml_z_max))
        throw DomainError("ml_scalar: |z| = " + std::to_string(std::abs(z)) + " exceeds " +
                          std::to_string(ml_z_max));
    if (z == 0.0) return inv_gamma(p.beta);

    // Alternating series lose digits to cancellation roughly in proportion to
    // their largest term; switch to 50-digit arithmetic when that would cost
    // more than about 1e-14 absolute.
    double peak = -HUGE_VAL;
    if (z < 0.0) {
        for (int k = 0; k < ml_max_terms; ++k) {
            const double lt = log_term(p, z, k);
            if (lt > peak) peak = lt;
            else if (lt < peak - 40.0) break;
        }
    }
    if (z < 0.0 && peak > std::log(50.0)) {
        using big = boost::multiprecision::cpp_bin_float_50;
        const big bz = z, ba = p.alpha, bb = p.beta;
        const big s = sum_series<big>([&](int k) {
            return big(boost::multiprecision::pow(bz, k)) / boost::math::tgamma(ba * k + bb);
        });
        return static_cast<double>(s);
    }
    return sum_series<double>([&](int k) {
        const double x = p.alpha * k + p.beta;
        if (x < 170.0 && k < 300) return std::pow(z, k) / std::tgamma(x);
        const double mag = std::exp(log_term(p, z, k));
        return (z < 0.0 && (k % 2)) ? -mag : mag;
    });
}

Matrix ml_matrix(const MLParams& p, const Matrix& M, double scale) {
    check_params(p);
    if (!M.square()) throw DimensionError("ml_matrix: matrix must be square");
    const Matrix X = scale * M;
    const double nx = X.norm_inf();
    if (!(nx <= ml_z_max))
        throw DomainError("ml_matrix: norm of scaled argument " + std::to_string(nx) + " exceeds " +
                          std::to_string(ml_z_max));
    const std::size_t m = M.rows();
    Matrix power = Matrix::identity(m);
    Matrix sum = inv_gamma(p.beta) * Matrix::identity(m);
    if (nx == 0.0) return sum;
    // Majorant terms ‖X‖^k / Γ(αk+β) decide truncation.
    double prev = inv_gamma(p.beta);
    for (int k = 1; k < ml_max_terms; ++k) {
        power = power * X;
        const double g = inv_gamma(p.alpha * k + p.beta);
        sum += g * power;
        const double maj = std::exp(k * std::log(nx)) * g;
        if (maj < prev) {
            const double r = maj / prev;
            const double tail = maj * r / (1.0 - r);
            if (tail <= 1e-16 * std::max(sum.norm_inf(), 1e-300)) return sum;
        }
        prev = maj;
    }
    throw ConvergenceError("ml_matrix: series did not converge", prev);
}

} // namespace fractus
