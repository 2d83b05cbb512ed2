#pragma once

// Replication studies: for a true parameter vector and a list of sample
// sizes, simulate, fit and summarize mean, bias, RMSE and Wald coverage.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "bsimplex/bivariate.hpp"

namespace bsimplex::montecarlo {

struct ScenarioConfig {
    BivParams theta{0.5, 0.5, 2.0, 2.0, 1.0};
    std::vector<std::size_t> sizes;
    std::size_t reps = 1;
    std::uint64_t seed = 20240601;
    double level = 0.95;
    unsigned threads = 0;  // 0: default_threads()
};

struct ParamSummary {
    double mean = 0.0;
    double bias = 0.0;
    double rmse = 0.0;
    double coverage = 0.0;  // percent
};

struct SizeSummary {
    std::size_t n = 0;
    std::size_t used = 0;           // converged replications
    std::size_t nonconverged = 0;   // excluded from the summaries
    std::array<ParamSummary, kNumParams> params{};
};

struct McSummary {
    BivParams theta{0.5, 0.5, 2.0, 2.0, 1.0};
    std::size_t reps = 0;
    double level = 0.95;
    std::vector<SizeSummary> cells;  // in the order of ScenarioConfig::sizes
};

// BSIMPLEX_THREADS when set to a positive integer, otherwise the hardware
// concurrency (at least 1).
unsigned default_threads();

// Throws DomainError for an invalid config and EstimationError when no
// replication of some sample size converges. Replication r at size n uses
// the sample sampler::sample_matrix(theta, n, derive_seed(seed, n, r)), so
// the summary does not depend on the thread count.
McSummary run_scenario(const ScenarioConfig& cfg);

}  // namespace bsimplex::montecarlo
