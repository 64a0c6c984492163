#include "fractus/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Multi-order fractional Cauchy problems and state-transition matrices"};
    std::string command, spec, out = ".";
    fractus::RunOverrides ov;
    app.add_option("command", command, "solve | transition | duhamel | duality | theta")
        ->required()
        ->check(CLI::IsMember({"solve", "transition", "duhamel", "duality", "theta"}));
    app.add_option("--spec", spec, "problem file")->required();
    app.add_option("--out", out, "output directory");
    app.add_option("--n", ov.n, "number of grid nodes");
    app.add_option("--grading", ov.grading, "grid grading exponent");
    app.add_option("--tol", ov.tol, "solver tolerance");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fractus::exit_usage;
    }
    return fractus::run_file(command, spec, out, ov, std::cout, std::cerr);
}
