#include "fractus/cauchy_solver.hpp"

#include "fractus/errors.hpp"
#include "fractus/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

namespace fractus {

Dynamic linear_dynamic(const GridFunction& A, const GridFunction& B) {
    if (!A.grid().same_as(B.grid())) throw ArgumentError("linear_dynamic: A and B must share a grid");
    const std::size_t m = A.rows();
    if (A.cols() != m || B.rows() != m || B.cols() != 1)
        throw DimensionError("linear_dynamic: A must be m×m and B an m-vector");
    Dynamic f;
    f.m = m;
    double L = 0.0;
    for (std::size_t k = 0; k < A.size(); ++k) L = std::max(L, A.at(k).frobenius());
    f.lipschitz = L;
    f.eval = [A, B](const Vector& x, double t) {
        Vector y = A.interpolate(t) * x;
        const Matrix b = B.interpolate(t);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += b(i, 0);
        return y;
    };
    return f;
}

// ---- norms and contraction constant -------------------------------------------

namespace {

double node_norm(const GridFunction& q, std::size_t k) {
    double s = 0.0;
    for (std::size_t e = 0; e < q.stride(); ++e) {
        const double x = q.samples()[k * q.stride() + e];
        s += x * x;
    }
    return std::sqrt(s);
}

double vnorm(const Vector& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

bool all_finite(const GridFunction& q) {
    return std::all_of(q.samples().begin(), q.samples().end(), [](double x) { return std::isfinite(x); });
}

} // namespace

double bielecki_norm_l1(const GridFunction& q, double k) {
    const auto& g = q.grid();
    double s = 0.0, prev = node_norm(q, 0);
    for (std::size_t n = 1; n < q.size(); ++n) {
        const double cur = std::exp(-k * (g[n] - g.a)) * node_norm(q, n);
        s += 0.5 * (g[n] - g[n - 1]) * (prev + cur);
        prev = cur;
    }
    return s;
}

double bielecki_norm_sup(const GridFunction& q, double k) {
    const auto& g = q.grid();
    double m = 0.0;
    for (std::size_t n = 0; n < q.size(); ++n) m = std::max(m, std::exp(-k * (g[n] - g.a)) * node_norm(q, n));
    return m;
}

std::pair<std::int64_t, double> choose_k(double L, const VectorOrder& a) {
    if (!(L >= 0.0)) throw ArgumentError("choose_k: L must be non-negative");
    const auto ell = [&](double k) {
        double s = 0.0;
        for (double al : a.values) s += std::pow(k, -al);
        return L * s;
    };
    if (ell(1.0) <= 0.5) return {1, ell(1.0)};
    // ℓ is decreasing in k: double until it fits, then bisect on integers.
    std::int64_t lo = 1, hi = 2;
    while (ell(static_cast<double>(hi)) > 0.5) {
        lo = hi;
        if (hi > (std::int64_t{1} << 52)) throw ArgumentError("choose_k: required k is beyond range");
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (ell(static_cast<double>(mid)) <= 0.5) hi = mid;
        else lo = mid;
    }
    return {hi, ell(static_cast<double>(hi))};
}

double estimate_lipschitz(const Dynamic& f, const Vector& q_a, const TimeGrid& grid) {
    const std::size_t m = f.m;
    double rho = 1.0;
    for (double v : q_a) rho = std::max(rho, std::abs(v));
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double h = 1e-6 * rho;
    double L = 0.0;
    for (int s = 0; s < 64; ++s) {
        Vector x(m);
        for (std::size_t i = 0; i < m; ++i) x[i] = q_a[i] + rho * u(rng);
        const double t = grid[(static_cast<std::size_t>(s) * (grid.N - 1)) / 63];
        if (!f.inside(x)) continue;
        const Vector fx = f.eval(x, t);
        double fro = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            Vector xp = x;
            xp[j] += h;
            if (!f.inside(xp)) continue;
            const Vector fp = f.eval(xp, t);
            for (std::size_t i = 0; i < m; ++i) fro += std::pow((fp[i] - fx[i]) / h, 2);
        }
        if (std::isfinite(fro)) L = std::max(L, std::sqrt(fro));
    }
    return L;
}

namespace {

void setup_contraction(const Dynamic& f, const VectorOrder& a, const Vector& q_a, const TimeGrid& grid,
                       SolveReport& rep) {
    if (f.lipschitz) {
        rep.lipschitz = *f.lipschitz;
    } else {
        rep.lipschitz = estimate_lipschitz(f, q_a, grid);
        rep.lipschitz_estimated = true;
    }
    const auto [k, ell] = choose_k(rep.lipschitz, a);
    rep.bielecki_k = k;
    rep.contraction_ell = ell;
}

void check_problem(const Dynamic& f, const VectorOrder& a, const Vector& q_a) {
    if (!f.eval) throw ArgumentError("dynamic has no evaluator");
    if (a.size() != f.m || q_a.size() != f.m)
        throw DimensionError("order, initial value and dynamic dimensions differ");
}

std::map<double, quad::LowerTable> plain_tables(const TimeGrid& g, const VectorOrder& a) {
    std::map<double, quad::LowerTable> t;
    for (double al : a.values)
        if (!t.count(al)) t.emplace(al, quad::plain_table(g.nodes, al));
    return t;
}

Vector eval_checked(const Dynamic& f, const Vector& x, double t) {
    Vector y = f.eval(x, t);
    if (y.size() != f.m) throw DimensionError("dynamic returned a vector of the wrong size");
    return y;
}

enum class RunStatus { converged, max_iter, diverged, left_domain };

struct CaputoRun {
    GridFunction q;
    SolveReport rep;
    RunStatus status = RunStatus::max_iter;
    // First node of the latest finite iterate that failed `outside_watch`.
    std::optional<std::size_t> watch_node;
    GridFunction watch_iterate;
};

// Picard iteration for the Caputo representation. With `watch` set, iterates
// that leave the watched set are recorded instead of raising, and leaving Ω
// ends the run.
CaputoRun caputo_core(const Dynamic& f, const VectorOrder& a, const Vector& q_a, const TimeGrid& grid,
                      const PicardOptions& opt, const std::function<bool(const Vector&)>* watch) {
    check_problem(f, a, q_a);
    if (!f.inside(q_a)) throw DomainExitError("initial value lies outside the domain", grid.a);
    CaputoRun run;
    setup_contraction(f, a, q_a, grid, run.rep);
    const double k = static_cast<double>(run.rep.bielecki_k);
    const auto tables = plain_tables(grid, a);
    const std::size_t N = grid.N, m = f.m;

    GridFunction y(grid, m, 1);
    if (opt.initial) {
        if (opt.initial->size() != N || opt.initial->rows() != m) throw DimensionError("initial iterate shape");
        y = *opt.initial;
    } else {
        for (std::size_t n = 0; n < N; ++n) y.set(n, q_a);
    }
    std::vector<Vector> fv(N);
    for (int it = 1; it <= opt.max_iter; ++it) {
        for (std::size_t n = 0; n < N; ++n) fv[n] = eval_checked(f, y.vec(n), grid[n]);
        GridFunction next(grid, m, 1);
        for (std::size_t i = 0; i < m; ++i) {
            const auto& T = tables.at(a[i]);
            next(0, i) = q_a[i];
            for (std::size_t n = 1; n < N; ++n) {
                const double* w = T.row(n);
                double s = 0.0;
                for (std::size_t j = 0; j <= n; ++j) s += w[j] * fv[j][i];
                next(n, i) = q_a[i] + s;
            }
        }
        run.rep.iterations = it;
        if (!all_finite(next)) {
            run.status = RunStatus::diverged;
            run.q = y;
            return run;
        }
        for (std::size_t n = 0; n < N; ++n) {
            const Vector x = next.vec(n);
            if (!f.inside(x)) {
                if (!watch)
                    throw DomainExitError("Picard iterate left the domain at t = " + std::to_string(grid[n]),
                                          grid[n]);
                run.status = RunStatus::left_domain;
                run.watch_node = n;
                run.watch_iterate = next;
                run.q = next;
                return run;
            }
        }
        if (watch) {
            for (std::size_t n = 0; n < N; ++n)
                if ((*watch)(next.vec(n))) {
                    run.watch_node = n;
                    run.watch_iterate = next;
                    break;
                }
        }
        const GridFunction d = next - y;
        const double rb = bielecki_norm_sup(d, k), rs = bielecki_norm_sup(d, 0.0);
        run.rep.residuals.push_back(rb);
        run.rep.final_residual = rb;
        y = std::move(next);
        if (rb <= opt.tol && rs <= opt.tol) {
            run.rep.converged = true;
            run.status = RunStatus::converged;
            run.q = std::move(y);
            return run;
        }
        if (rs > 1e200) {
            run.status = RunStatus::diverged;
            run.q = std::move(y);
            return run;
        }
    }
    run.q = std::move(y);
    return run;
}

[[noreturn]] void throw_nonconvergence(const char* who, const SolveReport& rep) {
    throw ConvergenceError(std::string(who) + ": no convergence after " + std::to_string(rep.iterations) +
                               " iterations, last residual " + std::to_string(rep.final_residual),
                           rep.final_residual);
}

} // namespace

std::pair<GridFunction, SolveReport> picard_caputo(const Dynamic& f, const VectorOrder& a, const Vector& q_a,
                                                   const TimeGrid& grid, const PicardOptions& opt) {
    CaputoRun run = caputo_core(f, a, q_a, grid, opt, nullptr);
    if (run.status != RunStatus::converged) throw_nonconvergence("picard_caputo", run.rep);
    return {std::move(run.q), std::move(run.rep)};
}

std::pair<GridFunction, SolveReport> picard_caputo(const Dynamic& f, const VectorOrder& a, const Vector& q_a,
                                                   const TimeGrid& grid, double tol, int max_iter) {
    PicardOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    return picard_caputo(f, a, q_a, grid, o);
}

// The R-L iterate is q = S + r with S(t) = [(t−a)^{α−1}/Γ(α)] ⊗ q_a. The
// integrand f(S+r) is split by telescoping over the components that carry a
// singular term: f(r) plus increments Δ_c = f(r + S_{≤c}) − f(r + S_{<c}).
// Increments of components with α_c < 1 behave like (τ−a)^{α_c−1} and are
// integrated with that factor pulled into the weights; the value of
// Δ_c·(τ−a)^{1−α_c} at τ = a is taken from the first interior node.
std::pair<SingularGridFunction, SolveReport> picard_rl(const Dynamic& f, const VectorOrder& a,
                                                       const Vector& q_a, const TimeGrid& grid,
                                                       const PicardOptions& opt) {
    check_problem(f, a, q_a);
    if (!f.trivial_domain())
        throw UnsupportedDomainError("picard_rl: the Riemann-Liouville problem is solved on all of R^m only");
    SolveReport rep;
    setup_contraction(f, a, q_a, grid, rep);
    const double kb = static_cast<double>(rep.bielecki_k);
    const std::size_t N = grid.N, m = f.m;

    std::vector<std::size_t> regular_comps, singular_comps;
    for (std::size_t c = 0; c < m; ++c) {
        if (q_a[c] == 0.0) continue;
        (a[c] == 1.0 ? regular_comps : singular_comps).push_back(c);
    }
    std::vector<std::size_t> order = regular_comps;
    order.insert(order.end(), singular_comps.begin(), singular_comps.end());

    // S_c(t_n); node 0 only meaningful for α_c = 1.
    std::vector<Vector> S(N, Vector(m, 0.0));
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c : order) {
            if (a[c] == 1.0) S[n][c] = q_a[c];
            else if (n > 0) S[n][c] = q_a[c] * std::pow(grid[n] - grid.a, a[c] - 1.0) / std::tgamma(a[c]);
        }

    const auto plain = plain_tables(grid, a);
    std::map<std::pair<double, double>, quad::LowerTable> weighted;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t c : singular_comps) {
            const auto key = std::make_pair(a[i], a[c]);
            if (!weighted.count(key)) weighted.emplace(key, quad::weighted_table(grid.nodes, a[i], a[c] - 1.0));
        }

    GridFunction r(grid, m, 1);
    if (opt.initial) {
        if (opt.initial->size() != N || opt.initial->rows() != m) throw DimensionError("initial iterate shape");
        r = *opt.initial;
    }
    std::vector<Vector> g(N);                                    // f(r) plus regular increments
    std::vector<std::vector<Vector>> h(singular_comps.size(), std::vector<Vector>(N));
    for (int it = 1; it <= opt.max_iter; ++it) {
        for (std::size_t n = 0; n < N; ++n) {
            Vector x = r.vec(n);
            Vector fx = eval_checked(f, x, grid[n]);
            g[n] = fx;
            std::size_t si = 0;
            for (std::size_t c : order) {
                const bool sing = a[c] != 1.0;
                if (sing && n == 0) {
                    ++si;
                    continue;
                }
                x[c] += S[n][c];
                const Vector fn = eval_checked(f, x, grid[n]);
                Vector d(m);
                for (std::size_t i = 0; i < m; ++i) d[i] = fn[i] - fx[i];
                fx = fn;
                if (!sing) {
                    for (std::size_t i = 0; i < m; ++i) g[n][i] += d[i];
                } else {
                    const double sc = std::pow(grid[n] - grid.a, 1.0 - a[c]);
                    for (double& v : d) v *= sc;
                    h[si][n] = std::move(d);
                    ++si;
                }
            }
        }
        for (auto& hc : h)
            if (N > 1) hc[0] = hc[1];

        GridFunction next(grid, m, 1);
        for (std::size_t i = 0; i < m; ++i) {
            const auto& T = plain.at(a[i]);
            for (std::size_t n = 1; n < N; ++n) {
                const double* w = T.row(n);
                double s = 0.0;
                for (std::size_t j = 0; j <= n; ++j) s += w[j] * g[j][i];
                for (std::size_t si = 0; si < singular_comps.size(); ++si) {
                    const double* v = weighted.at({a[i], a[singular_comps[si]]}).row(n);
                    for (std::size_t j = 0; j <= n; ++j) s += v[j] * h[si][j][i];
                }
                next(n, i) = s;
            }
        }
        rep.iterations = it;
        if (!all_finite(next)) throw_nonconvergence("picard_rl (iterates not finite)", rep);
        const GridFunction d = next - r;
        const double rb = bielecki_norm_l1(d, kb), rl = bielecki_norm_l1(d, 0.0);
        rep.residuals.push_back(rb);
        rep.final_residual = rb;
        r = std::move(next);
        if (rb <= opt.tol && rl <= opt.tol) {
            rep.converged = true;
            SingularGridFunction q{entrywise_orders(a, m, 1), Matrix::column(q_a), std::move(r)};
            return {std::move(q), std::move(rep)};
        }
    }
    throw_nonconvergence("picard_rl", rep);
}

std::pair<SingularGridFunction, SolveReport> picard_rl(const Dynamic& f, const VectorOrder& a,
                                                       const Vector& q_a, const TimeGrid& grid, double tol,
                                                       int max_iter) {
    PicardOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    return picard_rl(f, a, q_a, grid, o);
}

// ---- maximal solutions -------------------------------------------------------

std::pair<GridFunction, MaximalVerdict> extend_maximal(const Dynamic& f, const VectorOrder& a, const Vector& q_a,
                                                       double compact_radius, double b_max,
                                                       const ExtendOptions& opt) {
    if (!(compact_radius > 0.0)) throw ArgumentError("extend_maximal: compact radius must be positive");
    if (!(b_max > opt.a)) throw ArgumentError("extend_maximal: need b_max > a");
    const std::function<bool(const Vector&)> outside = [&](const Vector& x) {
        return !(vnorm(x) <= compact_radius) || !f.inside(x);
    };
    if (outside(q_a)) throw ArgumentError("extend_maximal: q_a must lie inside the compact");
    const double grading = opt.grading > 0.0 ? opt.grading : default_grading(a.min());
    PicardOptions po;
    po.tol = opt.tol;
    po.max_iter = opt.max_iter;

    MaximalVerdict verdict;
    GridFunction last;
    double reached = opt.a;
    const double base_step = (b_max - opt.a) / std::max(1, opt.windows);
    double step = base_step;
    // The halving budget is shared by the whole run so that an approach to the
    // escape time cannot degenerate into ever shorter windows.
    int halvings = 0;
    while (reached < b_max) {
        const double b_try = std::min(reached + step, b_max);
        const TimeGrid grid = make_grid(opt.a, b_try, opt.n, grading);
        CaputoRun run = caputo_core(f, a, q_a, grid, po, &outside);
        if (run.status == RunStatus::converged) {
            for (std::size_t n = 0; n < grid.N; ++n) {
                const Vector x = run.q.vec(n);
                if (outside(x)) {
                    verdict.kind = VerdictKind::escaped;
                    verdict.escape_time = grid[n];
                    verdict.witness = x;
                    verdict.reached = b_try;
                    return {std::move(run.q), std::move(verdict)};
                }
            }
            reached = b_try;
            last = std::move(run.q);
            step = std::min(2.0 * step, base_step);
            continue;
        }
        // The extension failed: shrink the step, and once that is exhausted
        // accept an iterate that has left the compact as the escape witness.
        if (halvings < opt.max_halvings) {
            step *= 0.5;
            ++halvings;
            continue;
        }
        if (run.watch_node) {
            verdict.kind = VerdictKind::escaped;
            verdict.escape_time = grid[*run.watch_node];
            verdict.witness = run.watch_iterate.vec(*run.watch_node);
            verdict.reached = reached;
            return {std::move(run.watch_iterate), std::move(verdict)};
        }
        throw_nonconvergence("extend_maximal", run.rep);
    }
    verdict.kind = VerdictKind::global;
    verdict.reached = reached;
    return {std::move(last), std::move(verdict)};
}

} // namespace fractus
