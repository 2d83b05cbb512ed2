#pragma once

// Maximum likelihood for the bivariate Simplex model.
//
// Newton iterations run on eta = (logit mu1, logit mu2, log sigma1^2,
// log sigma2^2, lambda) with the analytic observed information. lambda
// stays in [-1, 1]: a bound becomes active when lambda sits on it and the
// score points outward, and the step is projected back onto the interval.
// Convergence: max |score| <= 1e-6 n in the original coordinates over the
// free parameters, and a Newton step below 1e-9 or one that no longer
// changes the log-likelihood. If Newton stalls the fit
// falls back to Nelder-Mead on an unconstrained
// reparameterization and then resumes Newton from that point.

#include <array>
#include <optional>
#include <string>
#include <utility>

#include "bsimplex/bivariate.hpp"
#include "bsimplex/dataset.hpp"

namespace bsimplex::estimate {

struct FitOptions {
    double level = 0.95;
    int max_iter = 200;
    std::optional<BivParams> init;  // moment_init(data) when empty
};

struct FitResult {
    BivParams estimates{0.5, 0.5, 1.0, 1.0, 0.0};
    std::array<double, kNumParams> std_errors{};
    Matrix5 vcov = Matrix5::Zero();
    std::array<std::pair<double, double>, kNumParams> ci{};
    double level = 0.95;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    double e_xy = 0.0;
    std::size_t n = 0;
    bool lambda_at_boundary = false;  // |lambda| >= 1 - 1e-6
    // False where the standard error comes from a singular information
    // matrix or, for lambda, from a boundary estimate.
    std::array<bool, kNumParams> se_reliable{};
    double max_abs_score = 0.0;
    std::string message;
};

// Sample means, mean unit deviance at those means, and
// lambda = clamp(3 rho_S, -0.95, 0.95) with rho_S the Spearman correlation
// (Spearman's rho of the FGM copula is lambda / 3). Throws EstimationError
// for fewer than 5 rows or a constant column.
BivParams moment_init(const Dataset& data);

// Same preconditions as moment_init. Non-convergence is reported through
// FitResult::converged, not by throwing.
FitResult fit(const Dataset& data, const FitOptions& options = {});

// est -/+ z_{(1+level)/2} se. Throws DomainError unless 0 < level < 1 and
// se >= 0.
std::pair<double, double> wald_ci(double est, double se, double level);

// Average-rank Spearman correlation.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace bsimplex::estimate
