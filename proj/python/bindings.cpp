#include "fractus/cauchy_solver.hpp"
#include "fractus/cli.hpp"
#include "fractus/errors.hpp"
#include "fractus/expr.hpp"
#include "fractus/frac_calculus.hpp"
#include "fractus/special_functions.hpp"
#include "fractus/transition.hpp"

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>
#include <sstream>

namespace py = pybind11;
using namespace fractus;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

TimeGrid grid_for(double a, double b, std::size_t n, double grading, const VectorOrder& alpha) {
    return make_grid(a, b, n, grading > 0.0 ? grading : default_grading(alpha.min()));
}

Array nodes_of(const TimeGrid& g) {
    Array out(static_cast<py::ssize_t>(g.N));
    std::copy(g.nodes.begin(), g.nodes.end(), out.mutable_data());
    return out;
}

// (N, rows) array from a column-vector grid function.
Array vectors_of(const GridFunction& q) {
    Array out({static_cast<py::ssize_t>(q.size()), static_cast<py::ssize_t>(q.rows())});
    auto o = out.mutable_unchecked<2>();
    for (std::size_t k = 0; k < q.size(); ++k)
        for (std::size_t i = 0; i < q.rows(); ++i) o(k, i) = q(k, i);
    return out;
}

GridFunction from_samples(const TimeGrid& g, const Array& values) {
    const py::buffer_info info = values.request();
    if (info.ndim != 1 && info.ndim != 2) throw DimensionError("samples must be 1-d or 2-d");
    if (static_cast<std::size_t>(info.shape[0]) != g.N) throw DimensionError("one sample per grid node expected");
    const std::size_t m = info.ndim == 2 ? static_cast<std::size_t>(info.shape[1]) : 1;
    GridFunction q(g, m, 1);
    std::copy(values.data(), values.data() + g.N * m, q.samples().begin());
    return q;
}

Matrix to_matrix(const Array& M) {
    if (M.ndim() != 2) throw DimensionError("expected a 2-d array");
    Matrix out(static_cast<std::size_t>(M.shape(0)), static_cast<std::size_t>(M.shape(1)));
    std::copy(M.data(), M.data() + M.size(), out.data().begin());
    return out;
}

Array from_matrix(const Matrix& M) {
    Array out({static_cast<py::ssize_t>(M.rows()), static_cast<py::ssize_t>(M.cols())});
    std::copy(M.data().begin(), M.data().end(), out.mutable_data());
    return out;
}

Vector to_vector(const Array& v) { return Vector(v.data(), v.data() + v.size()); }

Dynamic python_dynamic(py::function f, std::size_t m) {
    Dynamic d;
    d.m = m;
    d.eval = [f, m](const Vector& x, double t) {
        py::gil_scoped_acquire gil;
        Array xa(static_cast<py::ssize_t>(m));
        std::copy(x.begin(), x.end(), xa.mutable_data());
        const Array y = f(xa, t).cast<Array>();
        if (static_cast<std::size_t>(y.size()) != m) throw DimensionError("f must return m values");
        return to_vector(y);
    };
    return d;
}

py::dict report_dict(const SolveReport& r) {
    py::dict d;
    d["iterations"] = r.iterations;
    d["residual"] = r.final_residual;
    d["converged"] = r.converged;
    d["bielecki_k"] = r.bielecki_k;
    d["contraction_ell"] = r.contraction_ell;
    d["lipschitz"] = r.lipschitz;
    d["residuals"] = r.residuals;
    return d;
}

py::dict tableau_dict(const TransitionTableau& tab) {
    const std::size_t N = tab.grid.N, m = tab.m;
    Array reg({N, N, m, m});
    auto r = reg.mutable_unchecked<4>();
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t p = 0; p < m; ++p)
                for (std::size_t q = 0; q < m; ++q)
                    r(i, j, p, q) = j <= i ? tab.regular(i, j)(p, q) : std::numeric_limits<double>::quiet_NaN();
    py::dict d;
    d["t"] = nodes_of(tab.grid);
    d["regular"] = reg;
    d["amplitude"] = from_matrix(tab.amplitude);
    return d;
}

} // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "Multi-order fractional Cauchy problems and transition matrices";

    auto base = py::register_exception<Error>(mod, "FractusError", PyExc_RuntimeError);
    py::register_exception<ConvergenceError>(mod, "ConvergenceError", base.ptr());
    py::register_exception<DomainExitError>(mod, "DomainExitError", base.ptr());
    py::register_exception<UnsupportedOrderError>(mod, "UnsupportedOrderError", base.ptr());
    py::register_exception<ParseError>(mod, "ParseError", base.ptr());

    mod.def("gamma", &fractus::gamma, py::arg("x"));
    mod.def(
        "mittag_leffler", [](double alpha, double beta, double z) { return ml_scalar({alpha, beta}, z); },
        py::arg("alpha"), py::arg("beta"), py::arg("z"));
    mod.def(
        "mittag_leffler_matrix",
        [](double alpha, double beta, const Array& M, double scale) {
            return from_matrix(ml_matrix({alpha, beta}, to_matrix(M), scale));
        },
        py::arg("alpha"), py::arg("beta"), py::arg("M"), py::arg("scale") = 1.0);

    mod.def("default_grading", &default_grading, py::arg("min_order"));
    mod.def(
        "grid", [](double a, double b, std::size_t n, double grading) { return nodes_of(make_grid(a, b, n, grading)); },
        py::arg("a"), py::arg("b"), py::arg("n"), py::arg("grading") = 1.0);

    mod.def(
        "frac_integral",
        [](const Array& values, const std::vector<double>& alpha, double a, double b, double grading) {
            const VectorOrder al{Vector(alpha)};
            const TimeGrid g = make_grid(a, b, static_cast<std::size_t>(values.shape(0)), grading);
            return vectors_of(frac_integral_left(from_samples(g, values), al));
        },
        py::arg("values"), py::arg("alpha"), py::arg("a"), py::arg("b"), py::arg("grading") = 1.0,
        "Left fractional integral of samples taken on grid(a, b, len(values), grading).");
    mod.def(
        "caputo_derivative",
        [](const Array& values, const std::vector<double>& alpha, double a, double b, double grading) {
            const TimeGrid g = make_grid(a, b, static_cast<std::size_t>(values.shape(0)), grading);
            return vectors_of(caputo_derivative_left(from_samples(g, values), VectorOrder{Vector(alpha)}));
        },
        py::arg("values"), py::arg("alpha"), py::arg("a"), py::arg("b"), py::arg("grading") = 1.0);

    mod.def(
        "solve_caputo",
        [](py::function f, const std::vector<double>& alpha, const Array& qa, double a, double b, std::size_t n,
           double grading, double tol, int max_iter) {
            const VectorOrder al{Vector(alpha)};
            const TimeGrid g = grid_for(a, b, n, grading, al);
            const auto [q, rep] = picard_caputo(python_dynamic(f, al.size()), al, to_vector(qa), g, tol, max_iter);
            py::dict d = report_dict(rep);
            d["t"] = nodes_of(g);
            d["q"] = vectors_of(q);
            return d;
        },
        py::arg("f"), py::arg("alpha"), py::arg("qa"), py::arg("a") = 0.0, py::arg("b") = 1.0, py::arg("n") = 256,
        py::arg("grading") = 0.0, py::arg("tol") = 1e-10, py::arg("max_iter") = 200);
    mod.def(
        "solve_rl",
        [](py::function f, const std::vector<double>& alpha, const Array& qa, double a, double b, std::size_t n,
           double grading, double tol, int max_iter) {
            const VectorOrder al{Vector(alpha)};
            const TimeGrid g = grid_for(a, b, n, grading, al);
            const auto [q, rep] = picard_rl(python_dynamic(f, al.size()), al, to_vector(qa), g, tol, max_iter);
            py::dict d = report_dict(rep);
            d["t"] = nodes_of(g);
            d["regular"] = vectors_of(q.regular);
            d["weight"] = from_matrix(q.weight).attr("ravel")();
            return d;
        },
        py::arg("f"), py::arg("alpha"), py::arg("qa"), py::arg("a") = 0.0, py::arg("b") = 1.0, py::arg("n") = 256,
        py::arg("grading") = 0.0, py::arg("tol") = 1e-10, py::arg("max_iter") = 200,
        "q(t) = weight (t-a)^(alpha-1)/Gamma(alpha) + regular(t).");

    mod.def(
        "transition",
        [](py::function A, const std::vector<double>& alpha, double a, double b, std::size_t n, double grading,
           const std::string& kind) {
            const VectorOrder al{Vector(alpha)};
            const TimeGrid g = grid_for(a, b, n, grading, al);
            const std::size_t m = al.size();
            GridFunction Ag(g, m, m);
            for (std::size_t k = 0; k < g.N; ++k) Ag.set(k, to_matrix(A(g[k]).cast<Array>()));
            const auto ord = MatrixOrder::row_constant(al);
            if (kind == "rl") return tableau_dict(transition_rl(Ag, ord, g));
            if (kind == "caputo") return tableau_dict(transition_caputo(Ag, ord, g));
            throw ArgumentError("kind must be 'rl' or 'caputo'");
        },
        py::arg("A"), py::arg("alpha"), py::arg("a") = 0.0, py::arg("b") = 1.0, py::arg("n") = 65,
        py::arg("grading") = 0.0, py::arg("kind") = "rl");

    mod.def(
        "theta_bound",
        [](double M, const std::vector<double>& alpha, double a, double b) {
            const ThetaBound tb = theta_bound(M, MatrixOrder::row_constant(VectorOrder{Vector(alpha)}), a, b);
            py::dict d;
            d["theta"] = tb.theta;
            d["terms_used"] = tb.terms_used;
            d["delta"] = tb.delta;
            return d;
        },
        py::arg("M"), py::arg("alpha"), py::arg("a"), py::arg("b"));

    mod.def(
        "evaluate",
        [](const std::string& src, const std::vector<double>& x, double t) {
            return eval_expr(parse_expr(src, x.size()), x, t);
        },
        py::arg("expr"), py::arg("x"), py::arg("t"));

    mod.def(
        "run",
        [](const std::string& command, const std::string& spec, const std::string& out_dir,
           std::optional<std::size_t> n, std::optional<double> grading, std::optional<double> tol) {
            std::ostringstream out, err;
            const int code = run_file(command, spec, out_dir, RunOverrides{n, grading, tol}, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("command"), py::arg("spec"), py::arg("out_dir") = ".", py::arg("n") = py::none(),
        py::arg("grading") = py::none(), py::arg("tol") = py::none(),
        "Runs a CLI command; returns (exit_code, stdout, stderr).");
}
