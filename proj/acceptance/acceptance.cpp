// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
#include "fractus/cauchy_solver.hpp"
#include "fractus/frac_calculus.hpp"
#include "fractus/multiorder.hpp"
#include "fractus/special_functions.hpp"
#include "fractus/transition.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

using namespace fractus;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail, double seconds) {
    std::printf("C%-2d %-4s %-34s %s  [%.1fs]\n", id, ok ? "PASS" : "FAIL", name, detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... v) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, v...);
    return buf;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> body;
};

GridFunction constant(const TimeGrid& g, const Matrix& A) {
    GridFunction out(g, A.rows(), A.cols());
    for (std::size_t k = 0; k < g.N; ++k) out.set(k, A);
    return out;
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
    std::uniform_real_distribution<double> u(-1, 1);
    Matrix M(r, c);
    for (double& x : M.data()) x = u(rng);
    return M;
}

Matrix expm(const Matrix& A) {
    int s = 0;
    double n = A.norm_inf();
    while (n > 0.5) {
        n /= 2;
        ++s;
    }
    const Matrix X = std::pow(0.5, s) * A;
    Matrix E = Matrix::identity(A.rows()), T = E;
    for (int k = 1; k < 30; ++k) {
        T = (1.0 / k) * (T * X);
        E += T;
    }
    for (int i = 0; i < s; ++i) E = E * E;
    return E;
}

double rel(const Matrix& x, const Matrix& ref) {
    const double s = ref.max_abs();
    return (x - ref).max_abs() / (s > 0 ? s : 1.0);
}

// Shared problem of criteria 6 and 10.
struct LinearProblem {
    VectorOrder a{0.4, 0.7};
    TimeGrid g = make_grid(0, 1, 256, default_grading(0.4));
    GridFunction A, B;
    Vector qa{1.0, -0.5};

    LinearProblem() {
        std::mt19937_64 rng(7);
        std::vector<Matrix> knots;
        for (int k = 0; k < 6; ++k) knots.push_back(random_matrix(rng, 2, 2));
        A = GridFunction::from_function(g, 2, 2, [&](double t) {
            const std::size_t k = std::min<std::size_t>(4, static_cast<std::size_t>(5 * t));
            const double th = 5 * t - static_cast<double>(k);
            return (1 - th) * knots[k] + th * knots[k + 1];
        });
        B = GridFunction::from_function(g, 2, 1, [](double t) { return Matrix{{1.0}, {std::sin(t)}}; });
    }
};

// Problem of criteria 7 and 8.
struct DualityProblem {
    VectorOrder a{0.4, 0.7};
    TimeGrid g = make_grid(0, 1, 256, default_grading(0.4));
    GridFunction A = GridFunction::from_function(g, 2, 2, [](double t) { return Matrix{{1.0, t}, {0.0, 1.0}}; });
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + FRACTUS_EXE + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "Mittag-Leffler sanity",
         [](std::string& d) {
             double e1 = 0.0;
             for (double z : {-5.0, -2.0, 0.0, 1.0, 3.0, 5.0})
                 e1 = std::max(e1, std::abs(ml_scalar({1, 1}, z) - std::exp(z)));
             const double e2 = std::abs(ml_scalar({2, 1}, 4.0) - std::cosh(2.0));
             double e3 = 0.0;
             for (double al : {0.25, 0.5, 0.75, 1.0})
                 for (double be : {0.5, 1.0, 1.5, 2.0})
                     e3 = std::max(e3, std::abs(ml_scalar({al, be}, 0.0) * std::tgamma(be) - 1.0));
             d = fmt("exp %.2e cosh %.2e E(0)Γ(β) %.2e", e1, e2, e3);
             return e1 <= 1e-12 && e2 <= 1e-10 && e3 <= 1e-12;
         }},
        {2, "semigroup law",
         [](std::string& d) {
             auto defect = [](std::size_t N) {
                 const TimeGrid g = make_grid(0, 1, N, 1.0);
                 const GridFunction q = GridFunction::from_function(g, 1, 1, [](double t) {
                     return Matrix{{std::sin(t)}};
                 });
                 const GridFunction lhs =
                     frac_integral_left(frac_integral_left(q, VectorOrder{0.4}), VectorOrder{0.3});
                 return (lhs - frac_integral_left(q, VectorOrder{0.7})).max_abs();
             };
             const double e1 = defect(512), e2 = defect(1024), order = std::log2(e1 / e2);
             d = fmt("N=512 %.2e N=1024 %.2e order %.2f", e1, e2, order);
             return e1 <= 1e-3 && e2 < e1 && order >= 0.3;
         }},
        {3, "derivatives of the constant",
         [](std::string& d) {
             const TimeGrid g = make_grid(0, 1, 512, default_grading(0.5));
             const GridFunction one = constant(g, Matrix{{1.0}});
             double c = 0.0;
             for (double al : {0.3, 0.7, 1.0})
                 c = std::max(c, caputo_derivative_left(one, VectorOrder{al}).max_abs());
             const GridFunction r = rl_derivative_left(one, VectorOrder{0.5});
             double worst = 0.0;
             for (std::size_t k = 1; k + 1 < g.N; ++k) {
                 const double ex = 1.0 / (std::sqrt(g[k]) * std::tgamma(0.5));
                 worst = std::max(worst, std::abs(r(k, 0) - ex) / ex);
             }
             d = fmt("max|cD[1]| %.1e  D^0.5 rel %.2e", c, worst);
             return c == 0.0 && worst <= 0.02;
         }},
        {4, "constant-coefficient closed forms",
         [](std::string& d) {
             const auto ord = MatrixOrder::row_constant(VectorOrder{0.5});
             auto errors = [&](std::size_t N) {
                 const TimeGrid g = make_grid(0, 1, N, default_grading(0.5));
                 const GridFunction A = constant(g, Matrix{{1.0}});
                 const auto cz = transition_caputo(A, ord, g);
                 const auto z = transition_rl(A, ord, g);
                 double ec = 0.0, ez = 0.0;
                 for (std::size_t i = 1; i < N; ++i) {
                     const double t = g[i];
                     const double c_ex = ml_scalar({0.5, 1.0}, std::sqrt(t));
                     ec = std::max(ec, std::abs(cz.regular(i, 0)(0, 0) - c_ex) / c_ex);
                     if (i + 1 < N) {
                         const double z_ex = ml_scalar({0.5, 0.5}, std::sqrt(t)) / std::sqrt(t);
                         ez = std::max(ez, std::abs(z.full(i, 0)(0, 0) - z_ex) / z_ex);
                     }
                 }
                 return std::pair{ec, ez};
             };
             const auto [c1, z1] = errors(256);
             const auto [c2, z2] = errors(512);
             d = fmt("cZ %.2e->%.2e  Z %.2e->%.2e", c1, c2, z1, z2);
             return c1 <= 1e-3 && z1 <= 1e-2 && c2 < c1 && z2 < z1;
         }},
        {5, "classical limit",
         [](std::string& d) {
             std::mt19937_64 rng(7);
             Matrix M = random_matrix(rng, 3, 3);
             M *= 1.0 / M.norm_inf();
             const std::size_t N = 512;
             const TimeGrid g = make_grid(0, 1, N, 1.0);
             const auto cz = transition_caputo(constant(g, M), MatrixOrder::row_constant(VectorOrder{1, 1, 1}), g);
             double e = 0.0;
             for (std::size_t j = 0; j < N; j += 17)
                 for (std::size_t i = j; i < N; ++i) e = std::max(e, (cz.regular(i, j) - expm((g[i] - g[j]) * M)).max_abs());
             double flow = 0.0;
             for (std::size_t i = 0; i < N; i += 13)
                 for (std::size_t k = 0; k <= i; k += 11)
                     for (std::size_t j = 0; j <= k; j += 7)
                         flow = std::max(flow, (cz.regular(i, k) * cz.regular(k, j) - cz.regular(i, j)).max_abs());
             d = fmt("expm %.2e flow %.2e", e, flow);
             return e <= 1e-6 && flow <= 1e-5;
         }},
        {6, "Duhamel vs Picard",
         [](std::string& d) {
             const LinearProblem p;
             const Dynamic f = linear_dynamic(p.A, p.B);
             const auto [pc, rc] = picard_caputo(f, p.a, p.qa, p.g);
             const GridFunction dc = duhamel_caputo(p.A, p.B, p.qa, p.a, p.g);
             const auto [pr, rr] = picard_rl(f, p.a, p.qa, p.g);
             const SingularGridFunction dr = duhamel_rl(p.A, p.B, p.qa, p.a, p.g);
             // node-wise relative gap, scaled by the largest solution value
             const double gc = (pc - dc).max_abs() / pc.max_abs();
             const double gr = (pr.regular - dr.regular).max_abs() / pr.regular.max_abs();
             d = fmt("caputo %.2e  rl %.2e", gc, gr);
             return gc <= 1e-6 && gr <= 1e-6 && dr.weight == pr.weight;
         }},
        {7, "duality",
         [](std::string& d) {
             const DualityProblem p;
             const double rl = duality_residual_rl(p.A, p.a, p.g);
             const double cap = duality_residual_caputo(Matrix{{1.0, 1.0}, {0.0, 1.0}}, p.a, p.g);
             d = fmt("rl %.2e  caputo %.2e", rl, cap);
             return rl <= 1e-5 && cap <= 1e-5;
         }},
        {8, "theta bound",
         [](std::string& d) {
             const DualityProblem p;
             const auto ord = MatrixOrder::row_constant(p.a);
             const auto z = transition_rl(p.A, ord, p.g);
             double M = 0.0;
             for (std::size_t k = 0; k < p.g.N; ++k) M = std::max(M, p.A.at(k).norm_inf());
             const ThetaBound tb = theta_bound(M, ord, p.g.a, p.g.b);
             const double violation = check_theta(z, tb);
             double expect = 0.0;
             for (std::size_t r = 0; r < 2; ++r)
                 for (std::size_t c = 0; c < 2; ++c) expect = std::max(expect, 1.0 / std::tgamma(ord(r, c)));
             const double zero = theta_bound(0.0, ord, p.g.a, p.g.b).theta;
             d = fmt("violation %.3e (Θ=%.4g)  Θ(M=0) %.17g", violation, tb.theta, zero);
             return violation <= 1e-6 && zero == expect;
         }},
        {9, "escape behaviour",
         [](std::string& d) {
             Dynamic f;
             f.m = 1;
             f.eval = [](const Vector& x, double) { return Vector{x[0] * x[0]}; };
             const auto [q1, v1] = extend_maximal(f, VectorOrder{1.0}, Vector{1.0}, 10.0, 2.0);
             const auto [q2, v2] = extend_maximal(f, VectorOrder{0.5}, Vector{1.0}, 10.0, 2.0);
             const bool ok1 = v1.kind == VerdictKind::escaped && *v1.escape_time >= 0.85 && *v1.escape_time <= 0.95;
             const bool ok2 = v2.kind == VerdictKind::escaped && *v2.escape_time > 0.0 && *v2.escape_time <= 2.0;
             d = fmt("α=1 escape %.4f  α=0.5 escape %.4f", v1.escape_time.value_or(-1), v2.escape_time.value_or(-1));
             return ok1 && ok2;
         }},
        {10, "Bielecki machinery",
         [](std::string& d) {
             std::mt19937_64 rng(10);
             std::uniform_real_distribution<double> u(-5, 5);
             const TimeGrid g = make_grid(0, 1.5, 64, 2);
             bool sandwich = true;
             for (int n = 0; n < 100; ++n) {
                 GridFunction q(g, 2, 1);
                 for (double& x : q.samples()) x = u(rng);
                 for (double k : {1.0, 5.0}) {
                     const double grow = std::exp(k * 1.5) * (1 + 1e-14);
                     const double w1 = bielecki_norm_l1(q, k), p1 = bielecki_norm_l1(q, 0.0);
                     const double ws = bielecki_norm_sup(q, k), ps = bielecki_norm_sup(q, 0.0);
                     sandwich = sandwich && w1 <= p1 * (1 + 1e-14) && p1 <= grow * w1 && ws <= ps * (1 + 1e-14) &&
                                ps <= grow * ws;
                 }
             }
             const auto [k, ell] = choose_k(1.0, VectorOrder{0.5, 0.5});
             const LinearProblem p;
             const auto [q, rep] = picard_caputo(linear_dynamic(p.A, p.B), p.a, p.qa, p.g);
             // steps at the rounding floor carry no contraction information
             const double floor = 16 * 2.220446049250313e-16 * bielecki_norm_sup(q, static_cast<double>(rep.bielecki_k));
             std::size_t last = rep.residuals.size();
             while (last > 0 && rep.residuals[last - 1] <= floor) --last;
             double worst = 0.0;
             bool enough = last >= 6;
             for (std::size_t i = enough ? last - 5 : 1; i < last; ++i)
                 worst = std::max(worst, rep.residuals[i] / rep.residuals[i - 1]);
             d = fmt("sandwich %s  k=%lld ℓ=%.3f  ratio %.3f vs %.3f (%zu of %zu steps)", sandwich ? "ok" : "broken",
                     static_cast<long long>(k), ell, worst, rep.contraction_ell + 0.1, last, rep.residuals.size());
             return sandwich && k == 16 && std::abs(ell - 0.5) <= 1e-15 && enough &&
                    worst <= rep.contraction_ell + 0.1;
         }},
        {11, "Hadamard product identities",
         [](std::string& d) {
             std::mt19937_64 rng(11);
             std::uniform_real_distribution<double> u(0.05, 1.0);
             double worst = 0.0;
             for (int n = 0; n < 100; ++n) {
                 const Matrix A = random_matrix(rng, 4, 4), B = random_matrix(rng, 4, 4), C = random_matrix(rng, 4, 4);
                 Vector v(4), w(4);
                 for (auto& x : v) x = u(rng);
                 for (auto& x : w) x = u(rng);
                 const Matrix id = Matrix::identity(4);
                 worst = std::max({worst, rel(hadamard(A, B).transpose(), hadamard(A.transpose(), B.transpose())),
                                   rel(hadamard(row_lift(v), id), hadamard(col_lift(v), id)),
                                   rel(hadamard(row_lift(v), A) * B, hadamard(row_lift(v), A * B)),
                                   rel(A * hadamard(col_lift(w), B), hadamard(col_lift(w), A * B)),
                                   rel(hadamard(A, B + C), hadamard(A, B) + hadamard(A, C))});
             }
             d = fmt("max relative %.2e", worst);
             return worst <= 1e-14;
         }},
        {12, "Caputo/R-L coincidence",
         [](std::string& d) {
             const VectorOrder a{0.6};
             const TimeGrid g = make_grid(0, 1, 256, default_grading(0.6));
             Dynamic lin, forced;
             lin.m = forced.m = 1;
             lin.eval = [](const Vector& x, double) { return Vector{x[0]}; };
             forced.eval = [](const Vector& x, double) { return Vector{x[0] + 1.0}; };
             const auto [c0, r0] = picard_caputo(lin, a, Vector{0.0}, g);
             const auto [s0, t0] = picard_rl(lin, a, Vector{0.0}, g);
             const auto [c1, r1] = picard_caputo(forced, a, Vector{0.0}, g);
             const auto [s1, t1] = picard_rl(forced, a, Vector{0.0}, g);
             const double gap0 = (c0 - s0.regular).max_abs(), gap1 = (c1 - s1.regular).max_abs();
             d = fmt("zero data %.2e  forced %.2e", gap0, gap1);
             return gap0 <= 1e-8 && gap1 <= 1e-6;
         }},
        {13, "mixed Duhamel",
         [](std::string& d) {
             const VectorOrder a{0.5};
             const TimeGrid g = make_grid(0, 1, 256, default_grading(0.5));
             const GridFunction one = constant(g, Matrix{{1.0}});
             const double q1 = mixed_duhamel(one, one, Vector{1.0}, a, g, MixedWhich::q1).residual;
             const double q2 = mixed_duhamel(one, one, Vector{1.0}, a, g, MixedWhich::q2).residual;
             d = fmt("q1 %.2e  q2 %.2e", q1, q2);
             return q1 <= 1e-6 && q2 <= 1e-6;
         }},
        {14, "CLI end-to-end",
         [](std::string& d) {
             const fs::path root = fs::temp_directory_path() / "fractus_acceptance";
             fs::remove_all(root);
             fs::create_directories(root / "a");
             fs::create_directories(root / "b");
             const std::string data = FRACTUS_TEST_DATA;
             const std::string spec = data + "/minimal_caputo.txt";
             const int ra = run_cli("solve --spec \"" + spec + "\" --out \"" + (root / "a").string() + "\"");
             const int rb = run_cli("solve --spec \"" + spec + "\" --out \"" + (root / "b").string() + "\"");
             const std::string sa = slurp(root / "a" / "solution.csv"), sb = slurp(root / "b" / "solution.csv");
             const bool golden = sa == slurp(fs::path(FRACTUS_GOLDEN) / "minimal_caputo_solution.csv");
             {
                 std::ofstream bad(root / "bad.txt");
                 bad << "[problem]\nkind = caputo\nm = 1\nalpha = 1.5\na = 0\nb = 1\nqa = 1\n[dynamics]\nf1 = x1\n";
             }
             const int rbad = run_cli("solve --spec \"" + (root / "bad.txt").string() + "\" --out \"" + root.string() + "\"");
             const int rit = run_cli("solve --spec \"" + data + "/one_iteration.txt\" --out \"" + root.string() + "\"");
             d = fmt("exits %d/%d, identical %s, golden %s, invalid→%d, max_iter=1→%d", ra, rb,
                     !sa.empty() && sa == sb ? "yes" : "no", golden ? "match" : "differs", rbad, rit);
             return ra == 0 && rb == 0 && !sa.empty() && sa == sb && golden && rbad == 1 && rit == 2;
         }},
    };

    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        report(c.id, c.name, ok, detail,
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
