#include "fractus/transition.hpp"

#include "fractus/errors.hpp"
#include "fractus/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>

namespace fractus {

VectorOrder require_row_constant(const MatrixOrder& a, const char* who) {
    const std::size_t m = a.size();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (a(i, j) != a(i, 0))
                throw UnsupportedOrderError(std::string(who) + ": order must be row-constant");
    Vector v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = a(i, 0);
    return VectorOrder(v);
}

Matrix TransitionTableau::full(std::size_t i, std::size_t j) const {
    Matrix z = regular(i, j);
    if (kind == TransitionKind::caputo || i == j) return z;
    const double dt = grid[i] - grid[j];
    for (std::size_t c = 0; c < m; ++c) {
        const double al = order(c, c);
        z(c, c) += amplitude(c, c) * std::pow(dt, al - 1.0);
    }
    return z;
}

namespace {

// One Volterra column on a mesh u_k = L·x_k, x_0 = 0, x_{n−1} = 1:
//   rl:     Y(u) = 𝓢[A·K⊗Id](u) + 𝓦[A Y](u), Y = regular part of Z(s+u, s)
//   caputo: Y(u) = Id + 𝓦[A Y](u)
// with entry (r,c) integrated at order α_rc and K carrying α_cc. The discrete
// equations are solved by forward substitution node by node.
//
// With `peel` (rl only) the leading term G = 𝓢[A·K⊗Id] ~ u^{α_rc+α_cc−1} is
// kept apart: Y = G + Y₂ with Y₂ = 𝓘[A G] + 𝓦[A Y₂], where A G is integrated
// against its own power weight. Y₂ is much milder at u = 0 than Y, which
// matters when α_rc + α_cc < 1 and Y itself is unbounded there.
class ColumnSolver {
public:
    struct Column {
        double L = 0.0;
        std::vector<double> tau;
        std::vector<Matrix> A, Y, P;   // P_k = A_k Y_k (A_k Y₂_k when peeled)
        std::vector<Matrix> h;         // rl: A_k(r,c)/Γ(α_cc)
        std::vector<Matrix> g;         // peeled: G_k(l,c)/u_k^{σ_lc}
    };

    ColumnSolver(const Matrix& orders, TransitionKind kind, std::vector<double> x, double grading, double xi_min,
                 bool peel)
        : ord_(orders), kind_(kind), x_(std::move(x)), g_(grading), xi_min_(xi_min), m_(orders.rows()),
          peel_(peel && kind == TransitionKind::rl) {
        const std::size_t m = m_;
        Wp_.assign(m * m, nullptr);
        Vp_.assign(m * m, nullptr);
        if (peel_) Gp_.assign(m * m * m, nullptr);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) {
                Wp_[r * m + c] = &plain(ord_(r, c));
                if (kind_ == TransitionKind::rl && ord_(c, c) < 1.0) Vp_[r * m + c] = &weighted(ord_(r, c), ord_(c, c) - 1.0);
                if (peel_)
                    for (std::size_t l = 0; l < m; ++l) {
                        const double sg = sigma(l, c);
                        Gp_[(r * m + l) * m + c] = sg == 0.0 ? &plain(ord_(r, c)) : &weighted(ord_(r, c), sg);
                    }
            }
    }

    Column solve(double L, const std::function<Matrix(double)>& A_of_u, double tol, long column) const {
        const std::size_t n = x_.size(), m = m_;
        Column col;
        col.L = L;
        col.tau.resize(n);
        for (std::size_t k = 0; k < n; ++k) col.tau[k] = L * x_[k];
        col.A.reserve(n);
        for (std::size_t k = 0; k < n; ++k) col.A.push_back(A_of_u(col.tau[k]));
        Matrix sW(m, m);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) sW(r, c) = std::pow(L, ord_(r, c));
        const Matrix id = Matrix::identity(m);
        col.Y.assign(n, kind_ == TransitionKind::caputo ? id : Matrix(m, m));
        col.P.assign(n, Matrix(m, m));
        col.P[0] = col.A[0] * col.Y[0];

        // Part of the right-hand side known before the implicit step: the
        // source term (rl) or Id (caputo), then the peeled integral.
        std::vector<Matrix> known(n, Matrix(m, m));
        if (kind_ == TransitionKind::caputo) {
            for (auto& k : known) k = id;
        } else {
            col.h = source_density(col.A);
            for (std::size_t i = 1; i < n; ++i) known[i] = source_term(col, i);
            if (peel_) {
                col.g.assign(n, Matrix(m, m));
                for (std::size_t l = 0; l < m; ++l)
                    for (std::size_t c = 0; c < m; ++c) {
                        const double sg = sigma(l, c);
                        col.g[0](l, c) = col.A[0](l, c) / std::tgamma(ord_(l, c) + ord_(c, c));
                        for (std::size_t k = 1; k < n; ++k) col.g[k](l, c) = known[k](l, c) / std::pow(col.tau[k], sg);
                    }
                for (std::size_t i = 1; i < n; ++i) {
                    col.Y[i] = known[i];   // G at the node
                    known[i] = peeled_term(col, i);
                }
            }
        }

        Matrix rhs(m, m);
        for (std::size_t i = 1; i < n; ++i) {
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < m; ++c) {
                    const double* w = Wp_[r * m + c]->row(i);
                    double s = 0.0;
                    for (std::size_t k = 0; k < i; ++k) s += w[k] * col.P[k](r, c);
                    rhs(r, c) = sW(r, c) * s + known[i](r, c);
                }
            const Matrix& Ai = col.A[i];
            Matrix Y(m, m);
            for (std::size_t c = 0; c < m; ++c) {
                Matrix M(m, m);
                Vector b(m);
                for (std::size_t r = 0; r < m; ++r) {
                    const double wd = sW(r, c) * Wp_[r * m + c]->row(i)[i];
                    for (std::size_t l = 0; l < m; ++l) M(r, l) = (r == l ? 1.0 : 0.0) - wd * Ai(r, l);
                    b[r] = rhs(r, c);
                }
                Vector y;
                try {
                    y = fractus::solve(M, b);
                } catch (const DomainError&) {
                    throw ConvergenceError("transition column " + std::to_string(column) + ": singular step", HUGE_VAL,
                                           column);
                }
                const Vector back = M * y;
                double defect = 0.0, scale = 1.0;
                for (std::size_t r = 0; r < m; ++r) {
                    defect = std::max(defect, std::abs(back[r] - b[r]));
                    scale = std::max(scale, std::abs(b[r]));
                }
                if (!(defect <= 10.0 * tol * scale))
                    throw ConvergenceError("transition column " + std::to_string(column) + ": defect " +
                                               std::to_string(defect),
                                           defect, column);
                for (std::size_t r = 0; r < m; ++r) Y(r, c) = y[r];
            }
            col.P[i] = Ai * Y;
            if (peel_) col.Y[i] += Y;
            else col.Y[i] = std::move(Y);
        }
        return col;
    }

    // Value at local offset u ∈ [0, L]. Close to the source node the discrete
    // equation is re-applied at u itself (Nyström); further out a cubic in
    // the mesh's uniform index coordinate is accurate.
    Matrix evaluate(const Column& col, double u) const {
        const std::size_t n = x_.size();
        const double xr = u / col.L;
        if (xr <= 0.0) return col.Y[0];
        if (xr >= 1.0 - 1e-14) return col.Y[n - 1];
        std::size_t j = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), xr) - x_.begin()) - 1;
        if (std::abs(xr - x_[j]) <= 1e-13 * xr) return col.Y[j];
        if (std::abs(x_[j + 1] - xr) <= 1e-13 * xr) return col.Y[j + 1];
        const double xi = static_cast<double>(n - 1) * std::pow(xr, 1.0 / g_);
        if (xi < xi_min_ || n < 6) return nystrom(col, u, j + 1);
        std::size_t lo = j >= 1 ? j - 1 : 0;
        lo = std::max<std::size_t>(lo, 1);
        if (lo + 3 > n - 1) lo = n - 4;
        // offsets from the first node keep constant columns exact
        Matrix out = col.Y[lo];
        for (std::size_t p = 1; p < 4; ++p) {
            double l = 1.0;
            const double xp = static_cast<double>(lo + p);
            for (std::size_t q = 0; q < 4; ++q)
                if (q != p) l *= (xi - static_cast<double>(lo + q)) / (xp - static_cast<double>(lo + q));
            out += l * (col.Y[lo + p] - col.Y[lo]);
        }
        return out;
    }

private:
    double sigma(std::size_t l, std::size_t c) const { return ord_(l, c) + ord_(c, c) - 1.0; }

    const quad::LowerTable& plain(double al) {
        auto it = W_.find(al);
        if (it == W_.end()) it = W_.emplace(al, quad::plain_table(x_, al)).first;
        return it->second;
    }
    const quad::LowerTable& weighted(double al, double sg) {
        const auto key = std::make_pair(al, sg);
        auto it = V_.find(key);
        if (it == V_.end()) it = V_.emplace(key, quad::weighted_table(x_, al, sg)).first;
        return it->second;
    }

    std::vector<Matrix> source_density(const std::vector<Matrix>& A) const {
        const std::size_t n = A.size(), m = m_;
        std::vector<Matrix> h(n, Matrix(m, m));
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < m; ++c) h[k](r, c) = A[k](r, c) / std::tgamma(ord_(c, c));
        // Without peeling the first interior value stands in at u = 0, as in
        // the R-L Picard solver, so that grid columns match it discretely.
        if (!peel_ && n > 1)
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < m; ++c)
                    if (ord_(c, c) < 1.0) h[0](r, c) = h[1](r, c);
        return h;
    }

    // 𝓢[A·K⊗Id] at node i
    Matrix source_term(const Column& col, std::size_t i) const {
        const std::size_t m = m_;
        Matrix out(m, m);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) {
                const auto* V = Vp_[r * m + c];
                const double e = V ? ord_(r, c) + ord_(c, c) - 1.0 : ord_(r, c);
                const double* v = V ? V->row(i) : Wp_[r * m + c]->row(i);
                double t = 0.0;
                for (std::size_t k = 0; k <= i; ++k) t += v[k] * col.h[k](r, c);
                out(r, c) = std::pow(col.L, e) * t;
            }
        return out;
    }

    // 𝓘[A G] at node i with the power weight of each G_lc
    Matrix peeled_term(const Column& col, std::size_t i) const {
        const std::size_t m = m_;
        Matrix out(m, m);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) {
                double s = 0.0;
                for (std::size_t l = 0; l < m; ++l) {
                    const double* v = Gp_[(r * m + l) * m + c]->row(i);
                    double t = 0.0;
                    for (std::size_t k = 0; k <= i; ++k) t += v[k] * col.A[k](r, l) * col.g[k](l, c);
                    s += std::pow(col.L, ord_(r, c) + sigma(l, c)) * t;
                }
                out(r, c) = s;
            }
        return out;
    }

    Matrix nystrom(const Column& col, double u, std::size_t last) const {
        const std::size_t m = m_;
        std::vector<double> w(last + 1), v(last + 1);
        Matrix out = kind_ == TransitionKind::caputo ? Matrix::identity(m) : Matrix(m, m);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) {
                const double al = ord_(r, c), ac = ord_(c, c);
                quad::plain_row(col.tau.data(), last, u, al, w.data());
                double s = 0.0;
                for (std::size_t k = 0; k <= last; ++k) s += w[k] * col.P[k](r, c);
                if (kind_ == TransitionKind::rl) {
                    if (ac < 1.0) {
                        quad::weighted_row(col.tau.data(), last, u, al, ac - 1.0, v.data());
                        for (std::size_t k = 0; k <= last; ++k) s += v[k] * col.h[k](r, c);
                    } else {
                        for (std::size_t k = 0; k <= last; ++k) s += w[k] * col.h[k](r, c);
                    }
                }
                if (peel_)
                    for (std::size_t l = 0; l < m; ++l) {
                        const double sg = sigma(l, c);
                        if (sg == 0.0) std::copy(w.begin(), w.end(), v.begin());
                        else quad::weighted_row(col.tau.data(), last, u, al, sg, v.data());
                        for (std::size_t k = 0; k <= last; ++k) s += v[k] * col.A[k](r, l) * col.g[k](l, c);
                    }
                out(r, c) += s;
            }
        return out;
    }

    Matrix ord_;
    TransitionKind kind_;
    std::vector<double> x_;
    double g_, xi_min_;
    std::size_t m_;
    bool peel_;
    std::map<double, quad::LowerTable> W_;
    std::map<std::pair<double, double>, quad::LowerTable> V_;
    std::vector<const quad::LowerTable*> Wp_, Vp_, Gp_;
};

constexpr double kXiMin = 48.0;

std::vector<double> graded_mesh(std::size_t n, double g);

// Columns on local graded meshes, optionally solved twice (n and 2n−1 nodes,
// the coarse mesh nested in the fine one) and combined by Richardson
// extrapolation against the second-order error of the product trapezoid.
class LocalScheme {
public:
    struct Column {
        ColumnSolver::Column coarse, fine;
    };

    LocalScheme(const Matrix& orders, TransitionKind kind, std::size_t n, double grading, bool extrapolate)
        : coarse_(orders, kind, graded_mesh(n, grading), grading, kXiMin, needs_peel(orders, kind)) {
        if (extrapolate)
            fine_.emplace(orders, kind, graded_mesh(2 * n - 1, grading), grading, kXiMin, needs_peel(orders, kind));
    }

    Column solve(double L, const std::function<Matrix(double)>& A_of_u, double tol, long column) const {
        Column c{coarse_.solve(L, A_of_u, tol, column), {}};
        if (fine_) c.fine = fine_->solve(L, A_of_u, tol, column);
        return c;
    }

    Matrix evaluate(const Column& c, double u) const {
        Matrix y = coarse_.evaluate(c.coarse, u);
        if (!fine_) return y;
        Matrix out = fine_->evaluate(c.fine, u);
        out += (1.0 / 3.0) * (out - y);
        return out;
    }

private:
    // Peeling pays off only when the leading term is not already smooth.
    static bool needs_peel(const Matrix& orders, TransitionKind kind) {
        if (kind != TransitionKind::rl) return false;
        for (std::size_t l = 0; l < orders.rows(); ++l)
            for (std::size_t c = 0; c < orders.cols(); ++c)
                if (orders(l, c) + orders(c, c) < 2.0) return true;
        return false;
    }

    ColumnSolver coarse_;
    std::optional<ColumnSolver> fine_;
};

std::vector<double> graded_mesh(std::size_t n, double g) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = std::pow(static_cast<double>(k) / static_cast<double>(n - 1), g);
    x.back() = 1.0;
    return x;
}

std::vector<double> normalised_nodes(const TimeGrid& g) {
    std::vector<double> x(g.N);
    for (std::size_t k = 0; k < g.N; ++k) x[k] = (g[k] - g.a) / (g.b - g.a);
    x.front() = 0.0;
    x.back() = 1.0;
    return x;
}

void check_inputs(const GridFunction& A, const MatrixOrder& a, const TimeGrid& grid) {
    if (grid.dense_right) throw ArgumentError("transition: grid must be graded at its left end");
    if (!A.grid().same_as(grid)) throw ArgumentError("transition: A must be sampled on the tableau grid");
    if (A.rows() != A.cols() || A.rows() != a.size())
        throw DimensionError("transition: A must be m×m with m matching the order");
    if (grid.N < 2) throw ArgumentError("transition: grid needs at least 2 nodes");
}

// Moments ∫ kernel(t_i,s) φ_j(s) ds on the grid for row-constant orders:
//   rl:     M_j = diag(𝓦^{α_c}[φ_j]) + 𝓦[A M_j]
//   caputo: M_j = (∫_a^t φ_j) Id + 𝓦[A M_j]
std::vector<Matrix> hat_moments(const GridFunction& A, const MatrixOrder& a, const TimeGrid& grid,
                                TransitionKind kind) {
    const std::size_t N = grid.N, m = a.size();
    std::map<double, quad::LowerTable> W;
    for (double al : a.values.data())
        if (!W.count(al)) W.emplace(al, quad::plain_table(grid.nodes, al));
    if (!W.count(1.0)) W.emplace(1.0, quad::plain_table(grid.nodes, 1.0));
    std::vector<const quad::LowerTable*> Wp(m * m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) Wp[r * m + c] = &W.at(a(r, c));
    std::vector<Matrix> As(N);
    for (std::size_t k = 0; k < N; ++k) As[k] = A.at(k);
    std::vector<Matrix> out(N * (N + 1) / 2, Matrix(m, m));
    std::vector<Matrix> P(N, Matrix(m, m));
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t i = j; i < N; ++i) {
            if (i == 0) continue;   // φ_0 integrated over an empty interval
            Matrix rhs(m, m);
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < m; ++c) {
                    const double* w = Wp[r * m + c]->row(i);
                    double s = 0.0;
                    for (std::size_t k = j; k < i; ++k) s += w[k] * P[k](r, c);
                    if (r == c) s += kind == TransitionKind::rl ? W.at(a(c, c)).row(i)[j] : W.at(1.0).row(i)[j];
                    rhs(r, c) = s;
                }
            Matrix Mi(m, m);
            for (std::size_t c = 0; c < m; ++c) {
                Matrix S(m, m);
                Vector b(m);
                for (std::size_t r = 0; r < m; ++r) {
                    const double wd = Wp[r * m + c]->row(i)[i];
                    for (std::size_t l = 0; l < m; ++l) S(r, l) = (r == l ? 1.0 : 0.0) - wd * As[i](r, l);
                    b[r] = rhs(r, c);
                }
                const Vector y = fractus::solve(S, b);
                for (std::size_t r = 0; r < m; ++r) Mi(r, c) = y[r];
            }
            P[i] = As[i] * Mi;
            out[TransitionTableau::index(i, j)] = std::move(Mi);
        }
        P[j] = Matrix(m, m);
    }
    return out;
}

} // namespace

TransitionTableau transition_build(const GridFunction& A, const MatrixOrder& a, const TimeGrid& grid,
                                   TransitionKind kind, const TransitionOptions& opt) {
    check_inputs(A, a, grid);
    const std::size_t N = grid.N, m = a.size();
    TransitionTableau tab;
    tab.grid = grid;
    tab.m = m;
    tab.kind = kind;
    tab.order = a;
    tab.amplitude = Matrix(m, m);
    if (kind == TransitionKind::rl)
        for (std::size_t c = 0; c < m; ++c) tab.amplitude(c, c) = 1.0 / std::tgamma(a(c, c));

    const Matrix diag = kind == TransitionKind::caputo ? Matrix::identity(m) : Matrix(m, m);
    const auto A_at = [&](double t) { return A.interpolate(std::clamp(t, grid.a, grid.b)); };

    const std::size_t n_loc = std::max<std::size_t>(opt.refine, 1) * (N - 1) + 1;
    const LocalScheme local(a.values, kind, n_loc, opt.local_grading, opt.extrapolate);
    tab.blocks.assign(N * (N + 1) / 2, Matrix(m, m));
    for (std::size_t j = 0; j + 1 < N; ++j) {
        const double s = grid[j];
        const auto col = local.solve(grid.b - s, [&](double u) { return A_at(s + u); }, opt.tol,
                                     static_cast<long>(j));
        tab.blocks[TransitionTableau::index(j, j)] = diag;
        for (std::size_t i = j + 1; i < N; ++i)
            tab.blocks[TransitionTableau::index(i, j)] = local.evaluate(col, grid[i] - s);
    }
    tab.blocks[TransitionTableau::index(N - 1, N - 1)] = diag;

    const ColumnSolver on_grid(a.values, kind, normalised_nodes(grid), 1.0, 0.0, false);
    tab.source_column =
        on_grid.solve(grid.b - grid.a, [&](double u) { return A_at(grid.a + u); }, opt.tol, 0).Y;

    if (opt.with_moments && a.tag != OrderTag::general) {
        require_row_constant(a, "transition moments");
        tab.moments = hat_moments(A, a, grid, kind);
    } else if (opt.with_moments) {
        bool row_constant = true;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) row_constant = row_constant && a(i, j) == a(i, 0);
        if (row_constant) tab.moments = hat_moments(A, a, grid, kind);
    }
    return tab;
}

TransitionTableau transition_rl(const GridFunction& A, const MatrixOrder& a, const TimeGrid& grid, double tol) {
    TransitionOptions o;
    o.tol = tol;
    return transition_build(A, a, grid, TransitionKind::rl, o);
}

TransitionTableau transition_caputo(const GridFunction& A, const MatrixOrder& a, const TimeGrid& grid,
                                    double tol) {
    TransitionOptions o;
    o.tol = tol;
    return transition_build(A, a, grid, TransitionKind::caputo, o);
}

// ---- Θ bound -----------------------------------------------------------------

namespace {

// Σ over all sequences (k_1..k_p) of 1/Γ(base + Σ_q v_{k_q}), grouped by the
// distinct values of v: multinomial counts, summed in log space.
double sequence_sum(double base, const std::vector<double>& values, const std::vector<double>& mult, int p) {
    const std::size_t d = values.size();
    std::vector<int> n(d, 0);
    double total = 0.0;
    const double lfp = std::lgamma(p + 1.0);
    std::function<void(std::size_t, int, double, double)> rec = [&](std::size_t g, int left, double lw,
                                                                    double sum_v) {
        if (g + 1 == d) {
            const double lg = lw - std::lgamma(left + 1.0) + left * std::log(mult[g]);
            total += std::exp(lfp + lg - std::lgamma(base + sum_v + left * values[g]));
            return;
        }
        for (int c = 0; c <= left; ++c)
            rec(g + 1, left - c, lw - std::lgamma(c + 1.0) + c * std::log(mult[g]), sum_v + c * values[g]);
    };
    rec(0, p, 0.0, 0.0);
    return total;
}

} // namespace

ThetaBound theta_bound(double M, const MatrixOrder& a, double t0, double t1) {
    if (!(M >= 0.0)) throw ArgumentError("theta_bound: M must be non-negative");
    if (!(t1 > t0)) throw ArgumentError("theta_bound: need b > a");
    ThetaBound tb;
    tb.M = M;
    tb.b = t1;
    tb.beta_min = a.min();
    tb.gamma_max = a.max();
    tb.delta = (t1 - t0) < 1.0 ? tb.beta_min : tb.gamma_max;
    const double x = M * std::pow(t1 - t0, tb.delta);
    const std::size_t m = a.size();
    double theta = 0.0;
    int used = 1;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            std::vector<double> vals, mult;
            for (std::size_t k = 0; k < m; ++k) {
                const double v = a(k, j);
                auto it = std::find(vals.begin(), vals.end(), v);
                if (it == vals.end()) {
                    vals.push_back(v);
                    mult.push_back(1.0);
                } else {
                    mult[static_cast<std::size_t>(it - vals.begin())] += 1.0;
                }
            }
            double sum = 1.0 / std::tgamma(a(i, j));
            int p = 1;
            if (x > 0.0) {
                double prev = sum;
                for (; p < 5000; ++p) {
                    const double term = std::exp(p * std::log(x)) * sequence_sum(a(i, j), vals, mult, p);
                    sum += term;
                    if (term < 1e-14 * sum && term <= prev) {
                        ++p;
                        break;
                    }
                    prev = term;
                }
            }
            theta = std::max(theta, sum);
            used = std::max(used, p);
        }
    tb.theta = theta;
    tb.terms_used = used;
    return tb;
}

double check_theta(const TransitionTableau& tab, const ThetaBound& bound) {
    if (tab.kind != TransitionKind::rl) throw ArgumentError("check_theta: needs a Riemann-Liouville tableau");
    double worst = -HUGE_VAL;
    for (std::size_t i = 1; i < tab.grid.N; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const Matrix& z = tab.regular(i, j);
            const double dt = tab.grid[i] - tab.grid[j];
            for (std::size_t r = 0; r < tab.m; ++r)
                for (std::size_t c = 0; c < tab.m; ++c) {
                    // scaled directly so that a bare kernel meets Θ without rounding
                    const double scaled = tab.amplitude(r, c) + z(r, c) * std::pow(dt, 1.0 - tab.order(r, c));
                    worst = std::max(worst, std::abs(scaled) - bound.theta);
                }
        }
    return worst;
}

// ---- Duhamel formulas ------------------------------------------------------------

namespace {

void check_duhamel(const GridFunction& A, const GridFunction& B, const Vector& q_a, const VectorOrder& a,
                   const TimeGrid& grid) {
    const std::size_t m = a.size();
    if (B.rows() != m || B.cols() != 1 || q_a.size() != m) throw DimensionError("duhamel: dimension mismatch");
    if (!B.grid().same_as(grid)) throw ArgumentError("duhamel: B must be sampled on the grid");
    (void)A;
}

// Σ_j moment(i,j) B_j
Vector moment_sum(const TransitionTableau& tab, const GridFunction& B, std::size_t i) {
    Vector s(tab.m, 0.0);
    for (std::size_t j = 0; j <= i; ++j) {
        const Vector y = tab.moment(i, j) * B.vec(j);
        for (std::size_t r = 0; r < tab.m; ++r) s[r] += y[r];
    }
    return s;
}

TransitionTableau build_for_duhamel(const GridFunction& A, const VectorOrder& a, const TimeGrid& grid,
                                    TransitionKind kind, double tol) {
    TransitionOptions o;
    o.tol = tol;
    return transition_build(A, MatrixOrder::row_constant(a), grid, kind, o);
}

} // namespace

SingularGridFunction duhamel_rl(const GridFunction& A, const GridFunction& B, const Vector& q_a,
                                const VectorOrder& a, const TimeGrid& grid, double tol) {
    check_duhamel(A, B, q_a, a, grid);
    const auto Z = build_for_duhamel(A, a, grid, TransitionKind::rl, tol);
    GridFunction reg(grid, a.size(), 1);
    for (std::size_t i = 1; i < grid.N; ++i) {
        Vector y = Z.source_column[i] * q_a;
        const Vector s = moment_sum(Z, B, i);
        for (std::size_t r = 0; r < y.size(); ++r) y[r] += s[r];
        reg.set(i, y);
    }
    return {entrywise_orders(a, a.size(), 1), Matrix::column(q_a), std::move(reg)};
}

GridFunction duhamel_caputo(const GridFunction& A, const GridFunction& B, const Vector& q_a,
                            const VectorOrder& a, const TimeGrid& grid, double tol) {
    check_duhamel(A, B, q_a, a, grid);
    const auto Z = build_for_duhamel(A, a, grid, TransitionKind::rl, tol);
    const auto cZ = build_for_duhamel(A, a, grid, TransitionKind::caputo, tol);
    GridFunction q(grid, a.size(), 1);
    for (std::size_t i = 0; i < grid.N; ++i) {
        Vector y = cZ.source_column[i] * q_a;
        const Vector s = moment_sum(Z, B, i);
        for (std::size_t r = 0; r < y.size(); ++r) y[r] += s[r];
        q.set(i, y);
    }
    return q;
}

MixedResult mixed_duhamel(const GridFunction& A, const GridFunction& B, const Vector& q_a, const VectorOrder& a,
                          const TimeGrid& grid, MixedWhich which, double tol) {
    check_duhamel(A, B, q_a, a, grid);
    const std::size_t m = a.size(), N = grid.N;
    const auto cZ = build_for_duhamel(A, a, grid, TransitionKind::caputo, tol);
    MixedResult res;
    GridFunction reg(grid, m, 1);
    std::vector<Matrix> head;
    if (which == MixedWhich::q1) head = build_for_duhamel(A, a, grid, TransitionKind::rl, tol).source_column;
    else head = cZ.source_column;
    for (std::size_t i = 0; i < N; ++i) {
        if (which == MixedWhich::q1 && i == 0) continue;
        Vector y = head[i] * q_a;
        const Vector s = moment_sum(cZ, B, i);
        for (std::size_t r = 0; r < m; ++r) y[r] += s[r];
        reg.set(i, y);
    }
    const Vector zero(m, 0.0);
    res.q = {entrywise_orders(a, m, 1), Matrix::column(which == MixedWhich::q1 ? q_a : zero), reg};

    // Residual against the representation with forcing F = I^{1−α}[B]. B is
    // piecewise linear, so F is known exactly between nodes; it is sampled on
    // a sub-grid and its α-integral taken there, while A q is integrated on the
    // grid it lives on.
    constexpr std::size_t sub = 16;
    std::vector<double> fine;
    fine.reserve(sub * (N - 1) + 1);
    for (std::size_t k = 0; k + 1 < N; ++k)
        for (std::size_t p = 0; p < sub; ++p)
            fine.push_back(grid[k] + (grid[k + 1] - grid[k]) * static_cast<double>(p) / sub);
    fine.push_back(grid.b);
    GridFunction integrand(grid, m, 1);
    for (std::size_t k = 0; k < N; ++k) integrand.set(k, A.at(k) * reg.vec(k));
    GridFunction rhs = frac_integral_left(integrand, a);
    std::vector<double> w(N), F(fine.size());
    for (std::size_t r = 0; r < m; ++r) {
        const double beta = 1.0 - a[r];
        for (std::size_t f = 0; f < fine.size(); ++f) {
            const std::size_t k = f / sub, p = f % sub;
            if (beta == 0.0) {
                const double th = static_cast<double>(p) / sub;
                F[f] = p == 0 ? B(k, r) : (1.0 - th) * B(k, r) + th * B(k + 1, r);
            } else if (f == 0) {
                F[f] = 0.0;
            } else {
                const std::size_t last = p == 0 ? k : k + 1;
                quad::plain_row(grid.nodes.data(), last, fine[f], beta, w.data());
                double s = 0.0;
                for (std::size_t q = 0; q <= last; ++q) s += w[q] * B(q, r);
                F[f] = s;
            }
        }
        const quad::LowerTable W = quad::plain_table(fine, a[r]);
        for (std::size_t n = 1; n < N; ++n) {
            const double* row = W.row(sub * n);
            double s = 0.0;
            for (std::size_t q = 0; q <= sub * n; ++q) s += row[q] * F[q];
            rhs(n, r) += s;
        }
    }
    if (which == MixedWhich::q2) {
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t r = 0; r < m; ++r) rhs(k, r) += q_a[r];
    } else {
        // singular part: ∫ K_{α_r}(t−τ) [A(τ) K_α(τ−a) q_a]_r dτ, weights with
        // the (τ−a)^{α_c−1} factor and the exact density at every node.
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) {
                if (q_a[c] == 0.0) continue;
                std::vector<double> w(N);
                for (std::size_t n = 1; n < N; ++n) {
                    quad::weighted_row(grid.nodes.data(), n, grid[n], a[r], a[c] - 1.0, w.data());
                    double s = 0.0;
                    for (std::size_t k = 0; k <= n; ++k) s += w[k] * A(k, r, c);
                    rhs(n, r) += s * q_a[c] / std::tgamma(a[c]);
                }
            }
    }
    double worst = 0.0;
    for (std::size_t k = (which == MixedWhich::q1 ? 1 : 0); k < N; ++k)
        for (std::size_t r = 0; r < m; ++r) worst = std::max(worst, std::abs(reg(k, r) - rhs(k, r)));
    res.residual = worst;
    return res;
}

// ---- duality -----------------------------------------------------------------------

// The right problem T(t,s) = K_α̲(t−s)⊗Id + ∫_s^t K_α̲(τ−s)⊗[T(t,τ)A(τ)] dτ is
// solved, for each fixed t, through V(u) = T(t,t−u)ᵀ which satisfies a left
// equation of order ᾱ with coefficient A(t−v)ᵀ.
double duality_residual_rl(const GridFunction& A, const VectorOrder& a, const TimeGrid& grid, double tol) {
    const MatrixOrder ord = MatrixOrder::row_constant(a);
    TransitionOptions o;
    o.tol = tol;
    o.with_moments = false;
    const auto Z = transition_build(A, ord, grid, TransitionKind::rl, o);
    const std::size_t N = grid.N;
    const LocalScheme right(ord.values, TransitionKind::rl, N, o.local_grading, o.extrapolate);
    double worst = 0.0;
    for (std::size_t i = 1; i < N; ++i) {
        const double t = grid[i];
        const auto col = right.solve(
            t - grid.a, [&](double v) { return A.interpolate(std::clamp(t - v, grid.a, grid.b)).transpose(); }, tol,
            static_cast<long>(i));
        for (std::size_t j = 0; j < i; ++j) {
            const Matrix T = right.evaluate(col, t - grid[j]).transpose();
            worst = std::max(worst, (T - Z.regular(i, j)).max_abs());
        }
    }
    return worst;
}

double duality_residual_caputo(const Matrix& A, const VectorOrder& a, const TimeGrid& grid, double tol) {
    if (!A.square() || A.rows() != a.size()) throw DimensionError("duality_residual_caputo: A must be m×m");
    const MatrixOrder ord = MatrixOrder::row_constant(a);
    GridFunction Ag(grid, A.rows(), A.cols());
    for (std::size_t k = 0; k < grid.N; ++k) Ag.set(k, A);
    TransitionOptions o;
    o.tol = tol;
    o.with_moments = false;
    const auto cZ = transition_build(Ag, ord, grid, TransitionKind::caputo, o);
    const std::size_t N = grid.N;
    const LocalScheme right(ord.values, TransitionKind::caputo, N, o.local_grading, o.extrapolate);
    const Matrix At = A.transpose();
    const auto col = right.solve(grid.b - grid.a, [&](double) { return At; }, tol, 0);
    double worst = 0.0;
    for (std::size_t i = 1; i < N; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const Matrix T = right.evaluate(col, grid[i] - grid[j]).transpose();
            worst = std::max(worst, (T - cZ.regular(i, j)).max_abs());
        }
    return worst;
}

} // namespace fractus
