#include "bsimplex/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "bsimplex/errors.hpp"
#include "bsimplex/estimate.hpp"
#include "bsimplex/sampler.hpp"

namespace bsimplex::montecarlo {

namespace {

struct Replication {
    bool converged = false;
    std::array<double, kNumParams> est{};
    std::array<bool, kNumParams> covered{};
};

Replication run_one(const ScenarioConfig& cfg, std::size_t n, std::size_t rep)
{
    Replication out;
    const Dataset data = sampler::sample_matrix(cfg.theta, n, sampler::derive_seed(cfg.seed, n, rep));
    estimate::FitOptions opt;
    opt.level = cfg.level;
    estimate::FitResult fit;
    try {
        fit = estimate::fit(data, opt);
    } catch (const EstimationError&) {
        return out;
    }
    if (!fit.converged) return out;
    out.converged = true;
    out.est = fit.estimates.to_array();
    const auto truth = cfg.theta.to_array();
    for (std::size_t j = 0; j < kNumParams; ++j) {
        // A missing interval (singular information) counts as not covering.
        out.covered[j] = fit.ci[j].first <= truth[j] && truth[j] <= fit.ci[j].second;
    }
    return out;
}

std::vector<Replication> run_cell(const ScenarioConfig& cfg, std::size_t n, unsigned threads)
{
    std::vector<Replication> reps(cfg.reps);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t r = next++; r < cfg.reps; r = next++) {
            try {
                reps[r] = run_one(cfg, n, r);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.reps));
    if (count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return reps;
}

SizeSummary summarize(const ScenarioConfig& cfg, std::size_t n, const std::vector<Replication>& reps)
{
    SizeSummary cell;
    cell.n = n;
    const auto truth = cfg.theta.to_array();
    std::array<double, kNumParams> sum{}, sq{}, hits{};
    for (const auto& r : reps) {
        if (!r.converged) {
            ++cell.nonconverged;
            continue;
        }
        ++cell.used;
        for (std::size_t j = 0; j < kNumParams; ++j) {
            sum[j] += r.est[j];
            sq[j] += (r.est[j] - truth[j]) * (r.est[j] - truth[j]);
            hits[j] += r.covered[j] ? 1.0 : 0.0;
        }
    }
    if (cell.used == 0) {
        throw EstimationError("run_scenario: no replication converged at n = " + std::to_string(n));
    }
    const double used = static_cast<double>(cell.used);
    for (std::size_t j = 0; j < kNumParams; ++j) {
        auto& p = cell.params[j];
        p.mean = sum[j] / used;
        p.bias = p.mean - truth[j];
        p.rmse = std::sqrt(sq[j] / used);
        p.coverage = 100.0 * hits[j] / used;
    }
    return cell;
}

}  // namespace

unsigned default_threads()
{
    if (const char* env = std::getenv("BSIMPLEX_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(std::min(v, 1024L));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

McSummary run_scenario(const ScenarioConfig& cfg)
{
    if (cfg.reps < 1) detail::domain_fail("run_scenario", "replication count must be at least 1");
    if (cfg.sizes.empty()) detail::domain_fail("run_scenario", "no sample sizes given");
    for (std::size_t n : cfg.sizes) {
        if (n < 5) detail::domain_fail("run_scenario", "sample sizes must be at least 5");
    }
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) detail::domain_fail("run_scenario", "level must lie in (0, 1)");

    const unsigned threads = cfg.threads > 0 ? cfg.threads : default_threads();
    McSummary out;
    out.theta = cfg.theta;
    out.reps = cfg.reps;
    out.level = cfg.level;
    for (std::size_t n : cfg.sizes) out.cells.push_back(summarize(cfg, n, run_cell(cfg, n, threads)));
    return out;
}

}  // namespace bsimplex::montecarlo
