#pragma once

// Command-line front end. run() holds the whole program so tests can drive
// it in-process; tools/bsimplex.cpp only forwards argv.
//
// Exit codes: 0 success, 2 usage, 3 bad input (parse, domain, I/O),
// 4 numerical failure or non-convergence.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsimplex/bivariate.hpp"
#include "bsimplex/estimate.hpp"
#include "bsimplex/montecarlo.hpp"

namespace bsimplex::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kBadInput = 3, kNumeric = 4 };

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Fit summary with fields estimates, std_errors, ci_lower, ci_upper, level,
// loglik, converged, iterations, e_xy, n, plus diagnostics and descriptive
// statistics of the data. Non-finite numbers are written as null.
nlohmann::json result_document(const estimate::FitResult& fit, const Dataset& data);

// Inverse of result_document for the fields it shares with FitResult.
// Throws ParseError on a malformed document.
estimate::FitResult parse_result_document(const nlohmann::json& doc);

// JSON object with keys theta (5 numbers), sizes, reps, seed, level and an
// optional name. Throws IoError when the file cannot be read and ParseError
// or DomainError for bad contents.
montecarlo::ScenarioConfig read_scenario(const std::filesystem::path& path);
montecarlo::ScenarioConfig parse_scenario(const nlohmann::json& doc);

// Header scenario,n,parameter,true,mean,bias,rmse,coverage,used,nonconverged.
void write_mc_header(std::ostream& out);
void write_mc_rows(std::ostream& out, const std::string& label, const montecarlo::McSummary& summary);

struct GridPoint {
    double y1;
    double y2;
    double density;
};

// (k + 1)^2 points of the lattice [eps, 1 - eps]^2, y2 varying fastest.
// Throws DomainError for k = 0 or eps outside (0, 1/2).
std::vector<GridPoint> density_grid(const BivParams& th, std::size_t k, double eps);

// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

}  // namespace bsimplex::cli
