#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "bsimplex/errors.hpp"
#include "bsimplex/sampler.hpp"
#include "bsimplex/simplex.hpp"

using namespace bsimplex;

namespace {

std::vector<double> ranks(const std::vector<double>& x)
{
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&x](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b)
{
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("streams are deterministic and addressable")
{
    const BivParams th(0.5, 0.3, 2.0, 1.0, 0.5);
    const Dataset a = sampler::sample_matrix(th, 10, 42);
    const Dataset b = sampler::sample_matrix(th, 10, 42);
    const Dataset c = sampler::sample_matrix(th, 10, 43);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
    CHECK(!std::equal(a.begin(), a.end(), c.begin()));
    const auto p7 = sampler::sample_pair(th, {42, 7});
    CHECK(a[7] == Observation{p7.first, p7.second});
    CHECK_THROWS_AS(sampler::sample_matrix(th, 0, 1), DomainError);
}

TEST_CASE("uniforms lie strictly inside the unit interval")
{
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const auto [u, v] = sampler::stream_uniforms({9, static_cast<std::uint64_t>(i)});
        lo = std::min({lo, u, v});
        hi = std::max({hi, u, v});
        sum += u + v;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(sum / (2.0 * n) - 0.5) < 0.01);
}

TEST_CASE("derived seeds differ across tags and replications")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t tag : {100, 1000})
        for (std::uint64_t rep = 0; rep < 500; ++rep) seen.insert(sampler::derive_seed(7, tag, rep));
    CHECK(seen.size() == 1000);
    CHECK(sampler::derive_seed(7, 100, 3) == sampler::derive_seed(7, 100, 3));
}

TEST_CASE("marginal draws follow the Simplex CDF")
{
    const BivParams th(0.9, 0.5, std::sqrt(11.0), 0.5, -0.7);
    const std::size_t n = 4000;
    const Dataset d = sampler::sample_matrix(th, n, 2);
    for (int m : {1, 2}) {
        auto y = m == 1 ? d.column1() : d.column2();
        std::sort(y.begin(), y.end());
        const auto F = simplex::cdf_many(y, th.margin(m));
        double ks = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ks = std::max({ks, std::abs(F[i] - static_cast<double>(i) / n), std::abs(F[i] - (i + 1.0) / n)});
        }
        // 1% critical value 1.628 / sqrt(n).
        CHECK(ks < 1.628 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("copula scale dependence")
{
    // Spearman rho of the FGM copula is lambda / 3.
    const std::size_t n = 20000;
    for (double lam : {1.0, -1.0, 0.0}) {
        const Dataset d = sampler::sample_matrix({0.5, 0.5, 2.0, 2.0, lam}, n, 77);
        const double rho = correlation(ranks(d.column1()), ranks(d.column2()));
        CHECK(std::abs(rho - lam / 3.0) < 0.02);
    }
}
