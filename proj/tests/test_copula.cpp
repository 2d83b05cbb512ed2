#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "bsimplex/copula.hpp"
#include "bsimplex/errors.hpp"

using namespace bsimplex;
namespace cp = bsimplex::copula;

TEST_CASE("Lambda validation and clamping")
{
    CHECK(Lambda(0.3).value() == 0.3);
    CHECK(Lambda(1.0 + 5e-13).value() == 1.0);
    CHECK(Lambda(-1.0 - 5e-13).value() == -1.0);
    CHECK_THROWS_AS(Lambda(1.5), DomainError);
    CHECK_THROWS_AS(Lambda(-1.0 - 1e-9), DomainError);
    CHECK_THROWS_AS(Lambda(NAN), DomainError);
}

TEST_CASE("fgm_cdf")
{
    for (double lam : {-1.0, 0.0, 0.4, 1.0}) {
        for (double u : {0.0, 0.2, 0.7, 1.0}) {
            CHECK(cp::fgm_cdf(u, 1.0, Lambda(lam)) == doctest::Approx(u));
            CHECK(cp::fgm_cdf(1.0, u, Lambda(lam)) == doctest::Approx(u));
            CHECK(cp::fgm_cdf(u, 0.0, Lambda(lam)) == 0.0);
        }
    }
    CHECK(cp::fgm_cdf(0.5, 0.5, Lambda(1.0)) == doctest::Approx(0.3125));
    CHECK(cp::fgm_cdf(0.3, 0.6, Lambda(0.0)) == doctest::Approx(0.18));
    CHECK_THROWS_AS(cp::fgm_cdf(1.1, 0.5, Lambda(0.0)), DomainError);
    CHECK_THROWS_AS(cp::fgm_cdf(0.5, -0.1, Lambda(0.0)), DomainError);
}

TEST_CASE("Frechet-Hoeffding bounds and 2-increasing property")
{
    const int k = 40;
    for (double lam : {-1.0, 0.0, 1.0}) {
        const Lambda l(lam);
        for (int i = 0; i <= k; ++i) {
            for (int j = 0; j <= k; ++j) {
                const double u = double(i) / k, v = double(j) / k;
                const double c = cp::fgm_cdf(u, v, l);
                CHECK(c >= std::max(u + v - 1.0, 0.0) - 1e-15);
                CHECK(c <= std::min(u, v) + 1e-15);
                if (i > 0 && j > 0) {
                    const double u0 = double(i - 1) / k, v0 = double(j - 1) / k;
                    const double vol = c - cp::fgm_cdf(u, v0, l) - cp::fgm_cdf(u0, v, l) + cp::fgm_cdf(u0, v0, l);
                    CHECK(vol >= -1e-15);
                }
            }
        }
    }
}

TEST_CASE("fgm_density")
{
    CHECK(cp::fgm_density(0.5, 0.1, Lambda(0.8)) == 1.0);
    CHECK(cp::fgm_density(0.0, 0.0, Lambda(1.0)) == 2.0);
    CHECK(cp::fgm_density(0.0, 1.0, Lambda(1.0)) == 0.0);
    const double h = 1e-4;
    for (double lam : {-0.7, 0.5}) {
        for (double u : {0.2, 0.6}) {
            for (double v : {0.1, 0.8}) {
                const Lambda l(lam);
                const double mixed = (cp::fgm_cdf(u + h, v + h, l) - cp::fgm_cdf(u + h, v - h, l)
                                      - cp::fgm_cdf(u - h, v + h, l) + cp::fgm_cdf(u - h, v - h, l))
                                     / (4 * h * h);
                CHECK(std::abs(mixed - cp::fgm_density(u, v, l)) < 1e-6);
            }
        }
    }
}

TEST_CASE("conditional cdf is dC/du")
{
    const double h = 1e-6;
    const Lambda l(0.6);
    for (double u : {0.1, 0.5, 0.9}) {
        for (double v : {0.3, 0.75}) {
            const double fd = (cp::fgm_cdf(u + h, v, l) - cp::fgm_cdf(u - h, v, l)) / (2 * h);
            CHECK(std::abs(fd - cp::fgm_conditional_cdf(u, v, l)) < 1e-8);
        }
    }
}

TEST_CASE("conditional_inverse")
{
    for (double v : {0.01, 0.4, 0.93}) {
        CHECK(cp::conditional_inverse(0.3, v, Lambda(0.0)) == doctest::Approx(v).epsilon(1e-15));
        CHECK(cp::conditional_inverse(0.5, v, Lambda(-1.0)) == doctest::Approx(v).epsilon(1e-15));
        CHECK(cp::conditional_inverse(0.5, v, Lambda(1.0)) == doctest::Approx(v).epsilon(1e-15));
    }

    // Brute-force root of dC/du(0.9, u2) = 0.5 at lambda = 1.
    const Lambda one(1.0);
    auto g = [&](double u2) { return cp::fgm_conditional_cdf(0.9, u2, one) - 0.5; };
    boost::uintmax_t iters = 200;
    const auto br = boost::math::tools::toms748_solve(g, 0.0, 1.0, boost::math::tools::eps_tolerance<double>(60), iters);
    const double brute = 0.5 * (br.first + br.second);
    const double u2 = cp::conditional_inverse(0.9, 0.5, one);
    CHECK(u2 > 0.0);
    CHECK(u2 < 1.0);
    CHECK(std::abs(u2 - brute) < 1e-10);

    for (double lam : {-1.0, -0.3, 0.8, 1.0}) {
        for (double u1 : {1e-9, 0.2, 0.77, 1 - 1e-9}) {
            double prev = 0.0;
            for (double v = 0.001; v < 1.0; v += 0.037) {
                const double x = cp::conditional_inverse(u1, v, Lambda(lam));
                CHECK(x > prev);
                CHECK(x < 1.0);
                CHECK(std::abs(cp::fgm_conditional_cdf(u1, x, Lambda(lam)) - v) < 1e-10);
                prev = x;
            }
        }
    }
    CHECK_THROWS_AS(cp::conditional_inverse(0.0, 0.5, one), DomainError);
    CHECK_THROWS_AS(cp::conditional_inverse(0.5, 1.0, one), DomainError);
}
