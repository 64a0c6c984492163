#include "fractus/cli.hpp"

#include "fractus/errors.hpp"
#include "fractus/transition.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fractus {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw ArgumentError("cannot write '" + path.string() + "'");
    }
    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
        out_ << '\n';
    }
    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) out_ << (i ? "," : "") << format_real(vals[i]);
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

std::vector<std::string> solution_header(std::size_t m, bool singular) {
    std::vector<std::string> h{"t"};
    for (std::size_t i = 1; i <= m; ++i) h.push_back("q" + std::to_string(i));
    if (singular)
        for (std::size_t i = 1; i <= m; ++i) h.push_back("w" + std::to_string(i));
    return h;
}

void write_solution(const std::filesystem::path& path, const GridFunction& q) {
    CsvWriter w(path);
    w.header(solution_header(q.rows(), false));
    for (std::size_t k = 0; k < q.grid().N; ++k) {
        std::vector<double> r{q.grid()[k]};
        for (std::size_t i = 0; i < q.rows(); ++i) r.push_back(q(k, i));
        w.row(r);
    }
}

// R-L: regular part per node plus the constant amplitude w of the
// (t−a)^{α−1}/Γ(α) term.
void write_solution(const std::filesystem::path& path, const SingularGridFunction& q) {
    CsvWriter w(path);
    const std::size_t m = q.regular.rows();
    w.header(solution_header(m, true));
    for (std::size_t k = 0; k < q.regular.grid().N; ++k) {
        std::vector<double> r{q.regular.grid()[k]};
        for (std::size_t i = 0; i < m; ++i) r.push_back(q.regular(k, i));
        for (std::size_t i = 0; i < m; ++i) r.push_back(q.weight(i, 0));
        w.row(r);
    }
}

void require_linear(const ProblemSpec& s, const std::string& command) {
    if (!s.linear) throw ArgumentError(command + " requires linear dynamics");
}

int solve(const ProblemSpec& s, const std::filesystem::path& dir, std::ostream& out) {
    const Dynamic f = s.dynamic();
    const TimeGrid g = s.grid();
    if (s.kind == ProblemKind::rl) {
        const auto [q, rep] = picard_rl(f, s.alpha, s.qa, g, s.tol, s.max_iter);
        write_solution(dir / "solution.csv", q);
        out << "solve rl: iterations=" << rep.iterations << " residual=" << format_real(rep.final_residual)
            << " verdict=global on [" << format_real(s.a) << "," << format_real(s.b) << "]\n";
        return exit_ok;
    }
    if (s.ball_radius) {
        ExtendOptions o;
        o.a = s.a;
        o.n = s.n;
        o.grading = s.grading;
        o.tol = s.tol;
        o.max_iter = s.max_iter;
        const auto [q, v] = extend_maximal(f, s.alpha, s.qa, *s.ball_radius, s.b, o);
        write_solution(dir / "solution.csv", q);
        out << "solve caputo: reached=" << format_real(v.reached) << " verdict=";
        if (v.kind == VerdictKind::escaped) out << "escaped at t=" << format_real(*v.escape_time) << "\n";
        else out << "global on [" << format_real(s.a) << "," << format_real(s.b) << "]\n";
        return exit_ok;
    }
    const auto [q, rep] = picard_caputo(f, s.alpha, s.qa, g, s.tol, s.max_iter);
    write_solution(dir / "solution.csv", q);
    out << "solve caputo: iterations=" << rep.iterations << " residual=" << format_real(rep.final_residual)
        << " verdict=global on [" << format_real(s.a) << "," << format_real(s.b) << "]\n";
    return exit_ok;
}

int transition(const ProblemSpec& s, const std::filesystem::path& dir, std::ostream& out) {
    require_linear(s, "transition");
    const TimeGrid g = s.grid();
    TransitionOptions o;
    o.tol = s.tol;
    o.with_moments = false;
    const auto kind = s.kind == ProblemKind::rl ? TransitionKind::rl : TransitionKind::caputo;
    const auto tab = transition_build(s.sample_A(g), MatrixOrder::row_constant(s.alpha), g, kind, o);
    CsvWriter w(dir / "transition.csv");
    std::vector<std::string> h{"t", "s"};
    for (std::size_t r = 1; r <= s.m; ++r)
        for (std::size_t c = 1; c <= s.m; ++c) h.push_back("z" + std::to_string(r) + "_" + std::to_string(c));
    w.header(h);
    for (std::size_t i = 0; i < g.N; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            std::vector<double> row{g[i], g[j]};
            for (double v : tab.regular(i, j).data()) row.push_back(v);
            w.row(row);
        }
    out << "transition " << (kind == TransitionKind::rl ? "rl" : "caputo") << ": columns=" << g.N << "\n";
    return exit_ok;
}

int duhamel(const ProblemSpec& s, const std::filesystem::path& dir, std::ostream& out) {
    require_linear(s, "duhamel");
    const TimeGrid g = s.grid();
    const GridFunction A = s.sample_A(g), B = s.sample_B(g);
    if (s.kind == ProblemKind::rl) write_solution(dir / "solution.csv", duhamel_rl(A, B, s.qa, s.alpha, g, s.tol));
    else write_solution(dir / "solution.csv", duhamel_caputo(A, B, s.qa, s.alpha, g, s.tol));
    out << "duhamel " << (s.kind == ProblemKind::rl ? "rl" : "caputo") << ": nodes=" << g.N << "\n";
    return exit_ok;
}

int duality(const ProblemSpec& s, const std::filesystem::path& dir, std::ostream& out) {
    require_linear(s, "duality");
    const TimeGrid g = s.grid();
    double res = 0.0;
    if (s.kind == ProblemKind::rl) {
        res = duality_residual_rl(s.sample_A(g), s.alpha, g, s.tol);
    } else {
        for (const auto& e : s.A)
            if (e.uses_time()) throw UnsupportedDomainError("caputo duality requires a constant A");
        res = duality_residual_caputo(s.sample_A(g).at(0), s.alpha, g, s.tol);
    }
    CsvWriter w(dir / "duality.csv");
    w.header({"residual"});
    w.row({res});
    out << "duality " << (s.kind == ProblemKind::rl ? "rl" : "caputo") << ": residual=" << format_real(res) << "\n";
    return exit_ok;
}

int theta(const ProblemSpec& s, const std::filesystem::path& dir, std::ostream& out) {
    require_linear(s, "theta");
    const TimeGrid g = s.grid();
    const GridFunction A = s.sample_A(g);
    double M = 0.0;
    for (std::size_t k = 0; k < g.N; ++k) M = std::max(M, A.at(k).norm_inf());
    const MatrixOrder ord = MatrixOrder::row_constant(s.alpha);
    const ThetaBound tb = theta_bound(M, ord, s.a, s.b);
    CsvWriter w(dir / "theta.csv");
    std::vector<std::string> h{"M", "theta", "terms_used", "beta_min", "gamma_max", "delta"};
    std::vector<double> row{tb.M, tb.theta, static_cast<double>(tb.terms_used), tb.beta_min, tb.gamma_max, tb.delta};
    out << "theta: M=" << format_real(M) << " theta=" << format_real(tb.theta);
    if (s.kind == ProblemKind::rl) {
        TransitionOptions o;
        o.tol = s.tol;
        o.with_moments = false;
        const double v = check_theta(transition_build(A, ord, g, TransitionKind::rl, o), tb);
        h.push_back("violation");
        row.push_back(v);
        out << " violation=" << format_real(v);
    }
    out << "\n";
    w.header(h);
    w.row(row);
    return exit_ok;
}

} // namespace

int run(const std::string& command, const ProblemSpec& spec, const std::filesystem::path& out_dir,
        std::ostream& out, std::ostream& err) {
    try {
        std::filesystem::create_directories(out_dir);
        if (command == "solve") return solve(spec, out_dir, out);
        if (command == "transition") return transition(spec, out_dir, out);
        if (command == "duhamel") return duhamel(spec, out_dir, out);
        if (command == "duality") return duality(spec, out_dir, out);
        if (command == "theta") return theta(spec, out_dir, out);
        err << "unknown command '" << command << "'\n";
        return exit_usage;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << "\n";
        return exit_nonconvergence;
    } catch (const DomainExitError& e) {
        err << "error: " << e.what() << " (declare a [domain] to get an escape verdict)\n";
        return exit_nonconvergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }
}

int run_file(const std::string& command, const std::string& spec_path, const std::filesystem::path& out_dir,
             const RunOverrides& ov, std::ostream& out, std::ostream& err) {
    ProblemSpec spec;
    try {
        spec = load_problem(spec_path);
        if (ov.n) spec.n = *ov.n;
        if (ov.grading) spec.grading = *ov.grading;
        if (ov.tol) spec.tol = *ov.tol;
        validate_problem(spec);
    } catch (const SpecError& e) {
        err << "error: " << spec_path;
        if (e.line) err << ":" << e.line;
        err << ": " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return run(command, spec, out_dir, out, err);
}

} // namespace fractus
