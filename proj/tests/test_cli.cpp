#include "fractus/cli.hpp"
#include "fractus/errors.hpp"
#include "fractus/problem.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace fractus;
namespace fs = std::filesystem;

namespace {

const std::string data_dir = FRACTUS_TEST_DATA;

std::string spec_path(const char* name) { return data_dir + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("fractus_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

const char* minimal =
    "[problem]\nkind = caputo\nm = 1\nalpha = 0.5\na = 0\nb = 1\nqa = 1\n[dynamics]\nf1 = x1\n";

// Replaces the line starting with `key` in the minimal spec.
std::string with_line(const std::string& key, const std::string& line) {
    std::string s = minimal;
    const auto at = s.find(key + " =");
    REQUIRE(at != std::string::npos);
    s.replace(at, s.find('\n', at) - at, line);
    return s;
}

std::string rejected_field(const std::string& text) {
    try {
        parse_problem(text);
    } catch (const SpecError& e) {
        return e.field;
    }
    return "";
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

} // namespace

TEST_CASE("minimal spec loads") {
    const ProblemSpec p = load_problem(spec_path("minimal_caputo.txt"));
    CHECK(p.kind == ProblemKind::caputo);
    CHECK(p.m == 1);
    CHECK(p.alpha[0] == 0.5);
    CHECK(p.a == 0.0);
    CHECK(p.b == 1.0);
    CHECK(p.qa == Vector{1.0});
    CHECK(p.n == 256);
    CHECK_FALSE(p.linear);
}

TEST_CASE("invalid specs are rejected with the field name") {
    try {
        parse_problem(with_line("alpha", "alpha = 1.5"));
        FAIL("expected a rejection");
    } catch (const SpecError& e) {
        CHECK(std::string(e.what()).find("alpha out of (0,1]") != std::string::npos);
        CHECK(e.field == "alpha");
        CHECK(e.line == 4);
    }
    CHECK(rejected_field(with_line("alpha", "alpha = 0")) == "alpha");
    CHECK(rejected_field(with_line("alpha", "alpha = 0.5, 0.5")) == "alpha");
    CHECK(rejected_field(with_line("b", "b = 0")) == "b");
    CHECK(rejected_field(with_line("b", "b = -1")) == "b");
    CHECK(rejected_field(with_line("kind", "kind = hilfer")) == "kind");
    CHECK(rejected_field(with_line("m", "m = 0")) == "m");
    CHECK(rejected_field(with_line("qa", "qa = 1, 2")) == "qa");
    CHECK(rejected_field(std::string(minimal) + "[solver]\nn = 2\n") == "n");
    CHECK(rejected_field(std::string(minimal) + "[solver]\ntol = 0\n") == "tol");
    CHECK(rejected_field(std::string(minimal) + "[solver]\nmax_iter = 0\n") == "max_iter");
    CHECK(rejected_field(std::string(minimal) + "[solver]\ngrading = 0.5\n") == "grading");
    CHECK(rejected_field(std::string(minimal) + "[solver]\nlipschitz = -1\n") == "lipschitz");
    CHECK(rejected_field(std::string(minimal) + "[domain]\nball_radius = 0.5\n") == "ball_radius");
    CHECK(rejected_field(std::string(minimal) + "[solver]\nspeed = 3\n") == "speed");
    CHECK(rejected_field(with_line("f1", "f1 = x2")) == "f1");
    CHECK(rejected_field(with_line("f1", "f1 = (x1")) == "f1");
}

TEST_CASE("solve writes one row per node") {
    const fs::path out = fresh_dir("solve");
    std::ostringstream so, se;
    CHECK(run_file("solve", spec_path("minimal_caputo.txt"), out, {}, so, se) == exit_ok);
    const std::string csv = slurp(out / "solution.csv");
    CHECK(csv.rfind("t,q1\n", 0) == 0);
    CHECK(count_lines(csv) == 257);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(so.str().find("iterations=") != std::string::npos);

    RunOverrides small;
    small.n = 17;
    CHECK(run_file("solve", spec_path("minimal_caputo.txt"), out, small, so, se) == exit_ok);
    CHECK(count_lines(slurp(out / "solution.csv")) == 18);
}

TEST_CASE("runs are byte-identical") {
    const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
    std::ostringstream so, se;
    for (const char* cmd : {"solve", "transition", "duhamel", "theta"}) {
        CAPTURE(cmd);
        REQUIRE(run_file(cmd, spec_path("linear_rl.txt"), a, {}, so, se) == exit_ok);
        REQUIRE(run_file(cmd, spec_path("linear_rl.txt"), b, {}, so, se) == exit_ok);
    }
    for (const char* file : {"solution.csv", "transition.csv", "theta.csv"}) {
        CAPTURE(file);
        const std::string x = slurp(a / file);
        CHECK(!x.empty());
        CHECK(x == slurp(b / file));
    }
    CHECK(slurp(a / "solution.csv").rfind("t,q1,q2,w1,w2\n", 0) == 0);
}

TEST_CASE("exit codes") {
    const fs::path out = fresh_dir("codes");
    std::ostringstream so, se;
    CHECK(run_file("duality", spec_path("nonlinear.txt"), out, {}, so, se) == exit_usage);
    CHECK(se.str().find("duality requires linear dynamics") != std::string::npos);
    CHECK(run_file("solve", spec_path("one_iteration.txt"), out, {}, so, se) == exit_nonconvergence);
    CHECK(run_file("solve", spec_path("missing.txt"), out, {}, so, se) == exit_usage);
    CHECK(run_file("integrate", spec_path("minimal_caputo.txt"), out, {}, so, se) == exit_usage);
    RunOverrides bad;
    bad.n = 2;
    CHECK(run_file("solve", spec_path("minimal_caputo.txt"), out, bad, so, se) == exit_usage);
}

TEST_CASE("escape verdict is reported") {
    const fs::path out = fresh_dir("escape");
    std::ostringstream so, se;
    RunOverrides o;
    o.n = 64;
    CHECK(run_file("solve", spec_path("escape.txt"), out, o, so, se) == exit_ok);
    CHECK(so.str().find("escaped") != std::string::npos);
}

TEST_CASE("number formatting") {
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(1.0) == "1");
    CHECK(format_real(-2.5e-20) == "-2.4999999999999999e-20");
}
