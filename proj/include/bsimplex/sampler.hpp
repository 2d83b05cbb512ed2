#pragma once

// Draws from the bivariate Simplex distribution: u1, v uniform; u2 from the
// conditional inverse of the FGM copula; both coordinates mapped through
// the marginal quantile functions.

#include <cstdint>
#include <utility>

#include "bsimplex/bivariate.hpp"
#include "bsimplex/dataset.hpp"

namespace bsimplex {

// Identifies an independent uniform stream. Streams are derived from
// (seed, index) alone, so any index can be generated without the others.
struct SeededStream {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
};

namespace sampler {

// The two uniforms (u1, v) of one stream, each strictly inside (0, 1).
std::pair<double, double> stream_uniforms(SeededStream stream);

std::pair<double, double> sample_pair(const BivParams& th, SeededStream stream);

// Row i is sample_pair(th, {seed, i}). Throws DomainError for n = 0.
Dataset sample_matrix(const BivParams& th, std::size_t n, std::uint64_t seed);

// Seed for replication `rep` of a study with the given master seed; `tag`
// separates independent uses of the same master (e.g. sample sizes).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t rep);

}  // namespace sampler

}  // namespace bsimplex
