#pragma once

#include "fractus/problem.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace fractus {

struct RunOverrides {
    std::optional<std::size_t> n;
    std::optional<double> grading;
    std::optional<double> tol;
};

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_nonconvergence = 2 };

// Runs one of solve | transition | duhamel | duality | theta, writing CSV
// files into out_dir and a one-line summary to `out`. Errors go to `err`.
int run(const std::string& command, const ProblemSpec& spec, const std::filesystem::path& out_dir,
        std::ostream& out, std::ostream& err);
// Loads the problem file, applies the overrides and runs.
int run_file(const std::string& command, const std::string& spec_path, const std::filesystem::path& out_dir,
             const RunOverrides& overrides, std::ostream& out, std::ostream& err);

// 17 significant digits, shortest exponent form.
std::string format_real(double v);

} // namespace fractus
