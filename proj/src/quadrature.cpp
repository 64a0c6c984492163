#include "fractus/quadrature.hpp"

#include "fractus/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>

namespace fractus::quad {

namespace {

// Incomplete beta B_x(a,b), not normalised.
double ibeta_raw(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return boost::math::beta(a, b);
    return boost::math::beta(a, b, x);
}

// Moments of s^{α−1} over a full interval s ∈ [u1, u0] against {1, u0−s}.
// r = h/u0 small uses the binomial series of (1−x/u0)^{α−1} to avoid the
// cancellation in u0^α − u1^α.
void kernel_moments(double alpha, double u0, double u1, double& m0, double& q) {
    const double h = u0 - u1;
    const double r = h / u0;
    if (r <= 0.5) {
        double c = 1.0, rj = 1.0, s0 = 0.0, s1 = 0.0;
        for (int j = 0; j < 80; ++j) {
            const double t0 = c * rj / (j + 1), t1 = c * rj / (j + 2);
            s0 += t0;
            s1 += t1;
            if (std::abs(t0) < 1e-17 * std::abs(s0)) break;
            c *= (j + 1 - alpha) / (j + 1);
            rj *= r;
        }
        const double base = std::pow(u0, alpha - 1.0);
        m0 = base * h * s0;
        q = base * h * h * s1;
    } else {
        const double a0 = std::pow(u0, alpha), a1 = u1 > 0.0 ? std::pow(u1, alpha) : 0.0;
        m0 = (a0 - a1) / alpha;
        q = u0 * m0 - (a0 * u0 - a1 * u1) / (alpha + 1.0);
    }
}

} // namespace

void beta_moments(double alpha, double sigma, double u0, double u1, double& P0, double& Q) {
    const double a = sigma + 1.0;
    if (u0 == 0.0) {
        if (u1 <= 0.5) {
            // (1−u)^{α−1} = Σ c_j u^j
            double c = 1.0, uj = std::pow(u1, a), s0 = 0.0, s1 = 0.0;
            for (int j = 0; j < 80; ++j) {
                const double t0 = c * uj / (a + j), t1 = c * uj * u1 / (a + j + 1);
                s0 += t0;
                s1 += t1;
                if (std::abs(t0) < 1e-17 * std::abs(s0)) break;
                c *= (j + 1 - alpha) / (j + 1);
                uj *= u1;
            }
            P0 = s0;
            Q = s1;
        } else {
            P0 = ibeta_raw(a, alpha, u1);
            Q = ibeta_raw(a + 1.0, alpha, u1);
        }
        return;
    }
    if (u1 >= 1.0) {
        const double w = 1.0 - u0;
        if (w <= 0.5) {
            // v = 1−u, (1−v)^σ = Σ d_j v^j
            double d = 1.0, wj = std::pow(w, alpha), s0 = 0.0, s1 = 0.0;
            for (int j = 0; j < 80; ++j) {
                const double t0 = d * wj / (alpha + j);
                const double t1 = d * wj * w / ((alpha + j) * (alpha + j + 1));
                s0 += t0;
                s1 += t1;
                if (std::abs(t0) < 1e-17 * std::abs(s0)) break;
                d *= (j - sigma) / (j + 1);
                wj *= w;
            }
            P0 = s0;
            Q = s1;
        } else {
            const double full0 = boost::math::beta(a, alpha), full1 = boost::math::beta(a + 1.0, alpha);
            P0 = full0 - ibeta_raw(a, alpha, u0);
            const double P1 = full1 - ibeta_raw(a + 1.0, alpha, u0);
            Q = P1 - u0 * P0;
        }
        return;
    }
    const double d = u1 - u0;
    if (u0 >= d && 1.0 - u1 >= d) {
        using GL = boost::math::quadrature::gauss<double, 10>;
        P0 = GL::integrate([&](double u) { return std::pow(u, sigma) * std::pow(1.0 - u, alpha - 1.0); },
                           u0, u1);
        Q = GL::integrate(
            [&](double u) { return std::pow(u, sigma) * std::pow(1.0 - u, alpha - 1.0) * (u - u0); }, u0, u1);
        return;
    }
    if (1.0 - u1 >= d) {
        P0 = ibeta_raw(a, alpha, u1) - ibeta_raw(a, alpha, u0);
        const double P1 = ibeta_raw(a + 1.0, alpha, u1) - ibeta_raw(a + 1.0, alpha, u0);
        Q = P1 - u0 * P0;
        return;
    }
    const double w0 = 1.0 - u0, w1 = 1.0 - u1;
    P0 = ibeta_raw(alpha, a, w0) - ibeta_raw(alpha, a, w1);
    const double P1 = ibeta_raw(alpha + 1.0, a, w0) - ibeta_raw(alpha + 1.0, a, w1);
    Q = w0 * P0 - P1;
}

void plain_row(const double* tau, std::size_t n, double t, double alpha, double* w) {
    for (std::size_t k = 0; k <= n; ++k) w[k] = 0.0;
    if (n == 0) return;
    const double g = 1.0 / std::tgamma(alpha);
    for (std::size_t k = 0; k + 1 <= n; ++k) {
        const double h = tau[k + 1] - tau[k];
        double m0, q;
        if (k + 1 < n || t >= tau[n]) {
            const double u0 = t - tau[k], u1 = (k + 1 == n) ? 0.0 : t - tau[k + 1];
            kernel_moments(alpha, u0, u1, m0, q);
        } else {
            // truncated last interval [τ_{n−1}, t]
            const double d = t - tau[k];
            m0 = std::pow(d, alpha) / alpha;
            q = std::pow(d, alpha + 1.0) / (alpha * (alpha + 1.0));
        }
        const double wr = q / h;
        w[k] += g * (m0 - wr);
        w[k + 1] += g * wr;
    }
}

void weighted_row(const double* tau, std::size_t n, double t, double alpha, double sigma, double* w) {
    if (sigma == 0.0) {
        plain_row(tau, n, t, alpha, w);
        return;
    }
    for (std::size_t k = 0; k <= n; ++k) w[k] = 0.0;
    if (n == 0) return;
    const double D = t - tau[0];
    const double scale = std::pow(D, alpha + sigma) / std::tgamma(alpha);
    for (std::size_t k = 0; k + 1 <= n; ++k) {
        const double u0 = (tau[k] - tau[0]) / D;
        const bool last = (k + 1 == n);
        const double u1 = last ? 1.0 : (tau[k + 1] - tau[0]) / D;
        const double len = (tau[k + 1] - tau[k]) / D;   // basis length, may exceed u1−u0
        double P0, Q;
        beta_moments(alpha, sigma, u0, u1, P0, Q);
        const double wr = Q / len;
        w[k] += scale * (P0 - wr);
        w[k + 1] += scale * wr;
    }
}

LowerTable plain_table(const std::vector<double>& tau, double alpha) {
    LowerTable T(tau.size());
    for (std::size_t i = 1; i < tau.size(); ++i) plain_row(tau.data(), i, tau[i], alpha, T.row(i));
    return T;
}

LowerTable weighted_table(const std::vector<double>& tau, double alpha, double sigma) {
    LowerTable T(tau.size());
    for (std::size_t i = 1; i < tau.size(); ++i) weighted_row(tau.data(), i, tau[i], alpha, sigma, T.row(i));
    return T;
}

} // namespace fractus::quad
