#include "bsimplex/sampler.hpp"

#include <random>
#include <vector>

#include "bsimplex/copula.hpp"
#include "bsimplex/errors.hpp"
#include "bsimplex/simplex.hpp"

namespace bsimplex::sampler {

namespace {

// Midpoint of one of 2^53 equal cells: never 0 or 1.
double open_unit(std::uint64_t bits)
{
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

std::pair<double, double> draw(const BivParams& th, SeededStream stream, const simplex::QuantileTable& q1,
                               const simplex::QuantileTable& q2)
{
    const auto [u1, v] = stream_uniforms(stream);
    const double u2 = copula::conditional_inverse(u1, v, th.lam());
    return {q1(u1), q2(u2)};
}

}  // namespace

std::pair<double, double> stream_uniforms(SeededStream stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(stream.seed), static_cast<std::uint32_t>(stream.seed >> 32),
                      static_cast<std::uint32_t>(stream.index), static_cast<std::uint32_t>(stream.index >> 32)};
    std::mt19937_64 gen(seq);
    const double u1 = open_unit(gen());
    const double v = open_unit(gen());
    return {u1, v};
}

std::pair<double, double> sample_pair(const BivParams& th, SeededStream stream)
{
    const simplex::QuantileTable q1(th.m1());
    const simplex::QuantileTable q2(th.m2());
    return draw(th, stream, q1, q2);
}

Dataset sample_matrix(const BivParams& th, std::size_t n, std::uint64_t seed)
{
    if (n == 0) detail::domain_fail("sample_matrix", "sample size must be at least 1");
    const simplex::QuantileTable q1(th.m1());
    const simplex::QuantileTable q2(th.m2());
    std::vector<Observation> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [y1, y2] = draw(th, {seed, i}, q1, q2);
        rows[i] = {y1, y2};
    }
    return Dataset(std::move(rows));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t rep)
{
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(tag),    static_cast<std::uint32_t>(tag >> 32),
                      static_cast<std::uint32_t>(rep),    static_cast<std::uint32_t>(rep >> 32),
                      0x5eedu};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace bsimplex::sampler
