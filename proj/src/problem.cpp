#include "fractus/problem.hpp"

#include "fractus/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace fractus {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    std::size_t line = 0;
};

using Section = std::map<std::string, Entry>;

double to_real(const Entry& e, const std::string& field) {
    double v = 0.0;
    const std::string s = trim(e.value);
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    const auto [end, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v))
        throw SpecError(field + ": expected a real number, got '" + s + "'", e.line, field);
    return v;
}

long to_int(const Entry& e, const std::string& field) {
    long v = 0;
    const std::string s = trim(e.value);
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size())
        throw SpecError(field + ": expected an integer, got '" + s + "'", e.line, field);
    return v;
}

Vector to_list(const Entry& e, const std::string& field) {
    Vector out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_real({item, e.line}, field));
    return out;
}

std::string coefficient_key(std::size_t i, std::size_t j, std::size_t m) {
    if (m <= 9) return "A" + std::to_string(i + 1) + std::to_string(j + 1);
    return "A" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

Expr to_expr(const Entry& e, const std::string& field, std::size_t m) {
    try {
        return parse_expr(e.value, m);
    } catch (const ParseError& err) {
        throw SpecError(field + ": " + err.what(), e.line, field);
    }
}

} // namespace

ProblemSpec parse_problem(const std::string& text) {
    std::map<std::string, Section> sections;
    static const std::map<std::string, std::vector<std::string>> fixed_keys = {
        {"problem", {"kind", "m", "alpha", "a", "b", "qa"}},
        {"solver", {"n", "grading", "tol", "max_iter", "lipschitz"}},
        {"domain", {"ball_radius"}},
        {"dynamics", {}},
    };
    std::string current;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw SpecError("malformed section header", line, "");
            current = trim(s.substr(1, s.size() - 2));
            if (!fixed_keys.count(current)) throw SpecError("unknown section [" + current + "]", line, current);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw SpecError("expected 'key = value'", line, "");
        const std::string key = trim(s.substr(0, eq));
        if (current.empty()) throw SpecError("key '" + key + "' outside of a section", line, key);
        const auto& allowed = fixed_keys.at(current);
        if (current != "dynamics" && std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw SpecError("unknown key '" + key + "' in [" + current + "]", line, key);
        auto& sec = sections[current];
        if (sec.count(key)) throw SpecError("duplicate key '" + key + "'", line, key);
        sec[key] = {trim(s.substr(eq + 1)), line};
    }

    ProblemSpec p;
    auto& pr = sections["problem"];
    const auto need = [&](const char* key) -> const Entry& {
        auto it = pr.find(key);
        if (it == pr.end()) throw SpecError(std::string("missing field '") + key + "' in [problem]", 0, key);
        return it->second;
    };

    const std::string kind = need("kind").value;
    if (kind == "rl") p.kind = ProblemKind::rl;
    else if (kind == "caputo") p.kind = ProblemKind::caputo;
    else throw SpecError("kind must be 'rl' or 'caputo'", need("kind").line, "kind");

    const long m = to_int(need("m"), "m");
    if (m < 1) throw SpecError("m must be at least 1", need("m").line, "m");
    p.m = static_cast<std::size_t>(m);

    const Vector al = to_list(need("alpha"), "alpha");
    if (al.size() != p.m)
        throw SpecError("alpha needs " + std::to_string(p.m) + " entries", need("alpha").line, "alpha");
    for (double x : al)
        if (!(x > 0.0 && x <= 1.0)) throw SpecError("alpha out of (0,1]", need("alpha").line, "alpha");
    p.alpha = VectorOrder(al);

    p.a = to_real(need("a"), "a");
    p.b = to_real(need("b"), "b");
    if (!(p.b > p.a)) throw SpecError("b must exceed a", need("b").line, "b");
    p.qa = to_list(need("qa"), "qa");
    if (p.qa.size() != p.m) throw SpecError("qa needs " + std::to_string(p.m) + " entries", need("qa").line, "qa");

    auto& so = sections["solver"];
    if (so.count("n")) {
        const long n = to_int(so["n"], "n");
        if (n < 3) throw SpecError("n must be at least 3", so["n"].line, "n");
        p.n = static_cast<std::size_t>(n);
    }
    if (so.count("grading")) {
        p.grading = to_real(so["grading"], "grading");
        if (p.grading != 0.0 && p.grading < 1.0) throw SpecError("grading must be ≥ 1 (or 0 for the default)", so["grading"].line, "grading");
    }
    if (so.count("tol")) {
        p.tol = to_real(so["tol"], "tol");
        if (!(p.tol > 0.0)) throw SpecError("tol must be positive", so["tol"].line, "tol");
    }
    if (so.count("max_iter")) {
        const long k = to_int(so["max_iter"], "max_iter");
        if (k < 1) throw SpecError("max_iter must be at least 1", so["max_iter"].line, "max_iter");
        p.max_iter = static_cast<int>(k);
    }
    if (so.count("lipschitz")) {
        p.lipschitz = to_real(so["lipschitz"], "lipschitz");
        if (*p.lipschitz < 0.0) throw SpecError("lipschitz must be non-negative", so["lipschitz"].line, "lipschitz");
    }
    auto& dom = sections["domain"];
    if (dom.count("ball_radius")) {
        p.ball_radius = to_real(dom["ball_radius"], "ball_radius");
        if (!(*p.ball_radius > 0.0))
            throw SpecError("ball_radius must be positive", dom["ball_radius"].line, "ball_radius");
        double norm = 0.0;
        for (double x : p.qa) norm += x * x;
        if (!(std::sqrt(norm) < *p.ball_radius))
            throw SpecError("qa must lie inside the ball", dom["ball_radius"].line, "ball_radius");
    }

    auto& dy = sections["dynamics"];
    const bool has_f = std::any_of(dy.begin(), dy.end(), [](const auto& kv) { return kv.first[0] == 'f'; });
    const bool has_A = std::any_of(dy.begin(), dy.end(), [](const auto& kv) { return kv.first[0] == 'A'; });
    if (has_f == has_A)
        throw SpecError(has_f ? "dynamics mixes f entries with A/B entries" : "dynamics needs f1..fm or A11..Amm",
                        0, "dynamics");
    std::map<std::string, bool> used;
    if (has_f) {
        for (std::size_t i = 0; i < p.m; ++i) {
            const std::string key = "f" + std::to_string(i + 1);
            auto it = dy.find(key);
            if (it == dy.end()) throw SpecError("missing field '" + key + "' in [dynamics]", 0, key);
            p.f.push_back(to_expr(it->second, key, p.m));
            used[key] = true;
        }
    } else {
        p.linear = true;
        for (std::size_t i = 0; i < p.m; ++i)
            for (std::size_t j = 0; j < p.m; ++j) {
                const std::string key = coefficient_key(i, j, p.m);
                auto it = dy.find(key);
                if (it == dy.end()) throw SpecError("missing field '" + key + "' in [dynamics]", 0, key);
                p.A.push_back(to_expr(it->second, key, 0));
                used[key] = true;
            }
        for (std::size_t i = 0; i < p.m; ++i) {
            const std::string key = "B" + std::to_string(i + 1);
            auto it = dy.find(key);
            p.B.push_back(it == dy.end() ? parse_expr("0", 0) : to_expr(it->second, key, 0));
            used[key] = true;
        }
    }
    for (const auto& [key, e] : dy)
        if (!used.count(key)) throw SpecError("unknown key '" + key + "' in [dynamics]", e.line, key);
    return p;
}

ProblemSpec load_problem(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError("cannot read problem file '" + path + "'", 0, "");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str());
}

void validate_problem(const ProblemSpec& p) {
    if (p.n < 3) throw SpecError("n must be at least 3", 0, "n");
    if (p.grading != 0.0 && p.grading < 1.0) throw SpecError("grading must be ≥ 1 (or 0 for the default)", 0, "grading");
    if (!(p.tol > 0.0)) throw SpecError("tol must be positive", 0, "tol");
    if (p.max_iter < 1) throw SpecError("max_iter must be at least 1", 0, "max_iter");
}

TimeGrid ProblemSpec::grid() const {
    return make_grid(a, b, n, grading == 0.0 ? default_grading(alpha.min()) : grading);
}

GridFunction ProblemSpec::sample_A(const TimeGrid& g) const {
    GridFunction out(g, m, m);
    const Vector none;
    for (std::size_t k = 0; k < g.N; ++k) {
        Matrix M(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) M(i, j) = eval_expr(A[i * m + j], none, g[k]);
        out.set(k, M);
    }
    return out;
}

GridFunction ProblemSpec::sample_B(const TimeGrid& g) const {
    GridFunction out(g, m, 1);
    const Vector none;
    for (std::size_t k = 0; k < g.N; ++k) {
        Vector v(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = eval_expr(B[i], none, g[k]);
        out.set(k, v);
    }
    return out;
}

Dynamic ProblemSpec::dynamic() const {
    Dynamic d;
    d.m = m;
    d.lipschitz = lipschitz;
    if (linear) {
        const auto Ae = A, Be = B;
        const std::size_t mm = m;
        d.eval = [Ae, Be, mm](const Vector& x, double t) {
            const Vector none;
            Vector y(mm, 0.0);
            for (std::size_t i = 0; i < mm; ++i) {
                double s = eval_expr(Be[i], none, t);
                for (std::size_t j = 0; j < mm; ++j) s += eval_expr(Ae[i * mm + j], none, t) * x[j];
                y[i] = s;
            }
            return y;
        };
    } else {
        const auto fe = f;
        d.eval = [fe](const Vector& x, double t) {
            Vector y(fe.size());
            for (std::size_t i = 0; i < fe.size(); ++i) y[i] = eval_expr(fe[i], x, t);
            return y;
        };
    }
    if (ball_radius) {
        const double r = *ball_radius;
        d.domain_test = [r](const Vector& x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return std::sqrt(s) < r;
        };
    }
    return d;
}

} // namespace fractus
