#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "bsimplex/errors.hpp"
#include "bsimplex/simplex.hpp"

using namespace bsimplex;
namespace sx = bsimplex::simplex;

namespace {

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Integral of h(y) g(y) over (0, 1) with tanh-sinh in logit coordinates.
template <class H>
double expect(const UniParams& p, H h)
{
    boost::math::quadrature::tanh_sinh<double> q(12);
    auto f = [&](double t) {
        const double y = 1.0 / (1.0 + std::exp(-t));
        if (!(y > 0.0 && y < 1.0)) return 0.0;
        return h(y) * sx::pdf(y, p) * y * (1.0 - y);
    };
    double total = 0.0;
    const double c = std::log(p.mu() / (1.0 - p.mu()));
    double lo = -80.0;
    for (double hi : {c - 6.0, c - 2.0, c, c + 2.0, c + 6.0, 80.0}) {
        if (hi <= lo) continue;
        total += q.integrate(f, lo, hi);
        lo = hi;
    }
    return total;
}

}  // namespace

TEST_CASE("UniParams validation")
{
    CHECK_NOTHROW(UniParams(0.5, 2.0));
    CHECK_THROWS_AS(UniParams(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(UniParams(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(UniParams(0.5, 0.0), DomainError);
    CHECK_THROWS_AS(UniParams(0.5, NAN), DomainError);
}

TEST_CASE("unit deviance")
{
    CHECK(sx::unit_deviance(0.5, 0.5) == 0.0);
    CHECK(rel(sx::unit_deviance(0.25, 0.5), 16.0 / 3.0) < 1e-14);
    const double far = sx::unit_deviance(0.999999999999, 0.5);
    CHECK(std::isfinite(far));
    CHECK(far > 1e12);
    CHECK_THROWS_AS(sx::unit_deviance(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(sx::unit_deviance(0.5, 1.0), DomainError);

    const double h = 1e-6;
    for (double y : {0.1, 0.45, 0.8}) {
        for (double mu : {0.2, 0.5, 0.7}) {
            const auto dd = sx::unit_deviance_derivatives(y, mu);
            const double d1 = (sx::unit_deviance(y, mu + h) - sx::unit_deviance(y, mu - h)) / (2 * h);
            const double d2 = (sx::unit_deviance_derivatives(y, mu + h).d1 - sx::unit_deviance_derivatives(y, mu - h).d1)
                              / (2 * h);
            CHECK(dd.d == doctest::Approx(sx::unit_deviance(y, mu)));
            CHECK(dd.d1 == doctest::Approx(d1).epsilon(1e-6));
            CHECK(dd.d2 == doctest::Approx(d2).epsilon(1e-6));
        }
    }
}

TEST_CASE("pdf and log_pdf")
{
    const UniParams p(0.5, 2.0);
    CHECK(rel(sx::pdf(0.5, p), 2.256758334191025) < 1e-12);
    CHECK(rel(sx::log_pdf(0.5, p), std::log(2.256758334191025)) < 1e-12);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.001, 0.999);
    for (int i = 0; i < 200; ++i) {
        const double y = u(rng), mu = u(rng), s = 0.1 + 5 * u(rng);
        const UniParams q(mu, s);
        const double lp = sx::log_pdf(y, q);
        if (lp > -700.0) CHECK(rel(std::exp(lp), sx::pdf(y, q)) < 1e-12);
        CHECK(std::abs(lp - sx::log_pdf(1.0 - y, UniParams(1.0 - mu, s))) <= 1e-12 * std::max(1.0, std::abs(lp)));
    }
    const double tiny = sx::log_pdf(1e-300, UniParams(0.5, 0.1));
    CHECK(std::isfinite(tiny));
    CHECK_THROWS_AS(sx::pdf(1.0, p), DomainError);
}

TEST_CASE("normalization on the 3x3 grid")
{
    for (double mu : {0.1, 0.5, 0.9}) {
        for (double s : {0.5, 2.0, 5.0}) {
            CAPTURE(mu);
            CAPTURE(s);
            CHECK(std::abs(expect(UniParams(mu, s), [](double) { return 1.0; }) - 1.0) < 1e-8);
        }
    }
    CHECK(std::abs(expect(UniParams(0.9, std::sqrt(11.0)), [](double) { return 1.0; }) - 1.0) < 1e-8);
}

TEST_CASE("cdf")
{
    CHECK(sx::cdf(0.0, UniParams(0.3, 1.0)) == 0.0);
    CHECK(sx::cdf(-2.0, UniParams(0.3, 1.0)) == 0.0);
    CHECK(sx::cdf(1.0, UniParams(0.3, 1.0)) == 1.0);
    for (double s : {0.1, 2.0, 30.0}) CHECK(std::abs(sx::cdf(0.5, UniParams(0.5, s)) - 0.5) < 1e-12);

    for (double mu : {0.1, 0.5, 0.9}) {
        for (double s : {0.5, 2.0, 5.0}) {
            const UniParams p(mu, s);
            double prev = 0.0;
            for (double y = 0.02; y < 1.0; y += 0.02) {
                const double F = sx::cdf(y, p);
                if (F > 1e-290 && F < 1.0 - 1e-12) CHECK(F > prev);
                CHECK(F >= prev);
                prev = F;
                CHECK(std::abs(F + sx::cdf(1.0 - y, UniParams(1.0 - mu, s)) - 1.0) < 1e-11);
            }
        }
    }
}

TEST_CASE("cdf against independent quadrature of the density")
{
    boost::math::quadrature::tanh_sinh<double> q(12);
    for (double mu : {0.2, 0.5, 0.9}) {
        for (double s : {0.5, 2.0, 5.0}) {
            const UniParams p(mu, s);
            for (double y : {0.05, 0.3, 0.7, 0.95}) {
                auto f = [&](double t) {
                    const double x = 1.0 / (1.0 + std::exp(-t));
                    return x > 0.0 ? sx::pdf(x, p) * x * (1.0 - x) : 0.0;
                };
                const double ty = std::log(y / (1 - y));
                const double c = std::log(mu / (1 - mu));
                double want = 0.0;
                double lo = -80.0;
                for (double hi : {c - 6, c - 2, c, c + 2, c + 6}) {
                    if (hi >= ty) break;
                    if (hi > lo) {
                        want += q.integrate(f, lo, hi);
                        lo = hi;
                    }
                }
                want += q.integrate(f, lo, ty);
                CHECK(std::abs(sx::cdf(y, p) - want) < 1e-10);
            }
        }
    }
}

TEST_CASE("cdf_many and cdf_derivatives are consistent with cdf")
{
    const UniParams p(0.35, 1.7);
    const std::vector<double> ys = {0.7, 0.01, 0.35, 0.35, 0.99, 0.2};
    const auto many = sx::cdf_many(ys, p);
    const auto der = sx::cdf_derivatives(ys, p);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        CHECK(std::abs(many[i] - sx::cdf(ys[i], p)) < 1e-13);
        CHECK(std::abs(der[i].F - many[i]) < 1e-13);
    }
    const double h = 1e-5;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const std::vector<double> one = {ys[i]};
        auto at = [&](double mu, double s) { return sx::cdf_derivatives(one, UniParams(mu, s))[0]; };
        const auto mp = at(0.35 + h, 1.7), mm = at(0.35 - h, 1.7);
        const auto sp = at(0.35, 1.7 + h), sm = at(0.35, 1.7 - h);
        CHECK(der[i].d_mu == doctest::Approx((mp.F - mm.F) / (2 * h)).epsilon(1e-6).scale(1e-3));
        CHECK(der[i].d_s == doctest::Approx((sp.F - sm.F) / (2 * h)).epsilon(1e-6).scale(1e-3));
        CHECK(der[i].d_mumu == doctest::Approx((mp.d_mu - mm.d_mu) / (2 * h)).epsilon(1e-5).scale(1e-5));
        CHECK(der[i].d_mus == doctest::Approx((sp.d_mu - sm.d_mu) / (2 * h)).epsilon(1e-5).scale(1e-5));
        CHECK(der[i].d_ss == doctest::Approx((sp.d_s - sm.d_s) / (2 * h)).epsilon(1e-5).scale(1e-5));
    }
}

TEST_CASE("quantile")
{
    CHECK(std::abs(sx::quantile(0.5, UniParams(0.5, 3.0)) - 0.5) < 1e-12);
    const UniParams p(0.9, std::sqrt(11.0));
    for (double y : {0.1, 0.3, 0.7, 0.9}) CHECK(std::abs(sx::quantile(sx::cdf(y, p), p) - y) < 1e-8);
    const UniParams p2(0.5, 2.0);
    const double u = sx::cdf(0.25, p2);
    CHECK(std::abs(sx::quantile(u, p2) - 0.25) < 1e-8);
    double prev = 1.0;
    for (double uu : {1e-3, 1e-6, 1e-9, 1e-12, 1e-15}) {
        const double y = sx::quantile(uu, p2);
        CHECK(y > 0.0);
        CHECK(y < prev);
        prev = y;
    }
    CHECK_THROWS_AS(sx::quantile(0.0, p2), DomainError);
    CHECK_THROWS_AS(sx::quantile(1.0, p2), DomainError);

    const sx::QuantileTable table(p);
    for (double uu : {1e-10, 0.01, 0.3, 0.77, 0.999999}) {
        const double y = table(uu);
        CHECK(std::abs(sx::cdf(y, p) - uu) < 1e-10);
    }
}

TEST_CASE("mean and variance")
{
    CHECK(sx::mean(UniParams(0.5, 2.0)) == 0.5);
    CHECK(rel(sx::variance(UniParams(0.5, 2.0)), 0.023661) < 1e-4);
    CHECK(rel(sx::variance(UniParams(0.5, 5.0)), 0.045568) < 1e-4);
    CHECK(rel(sx::variance(UniParams(0.9, std::sqrt(11.0))), 0.0022451) < 1e-4);
    for (double mu : {0.05, 0.3, 0.5, 0.9}) {
        for (double s : {0.01, 0.5, 2.0, 50.0}) {
            const UniParams p(mu, s);
            const double v = sx::variance(p);
            CAPTURE(mu);
            CAPTURE(s);
            CHECK(v > 0.0);
            CHECK(v < mu * (1 - mu));
            const double want = expect(p, [mu](double y) { return (y - mu) * (y - mu); });
            CHECK(rel(v, want) < 1e-7);
            CHECK(std::abs(expect(p, [](double y) { return y; }) - mu) < 1e-9);
        }
    }
    // Product form overflows naively; log-space evaluation stays finite.
    CHECK(std::isfinite(sx::variance(UniParams(0.01, 1e-4))));
}

TEST_CASE("deviance moments")
{
    for (double s : {0.5, 2.0}) {
        const UniParams p(0.3, s);
        CHECK(rel(expect(p, [](double y) { return sx::unit_deviance(y, 0.3); }), s) < 1e-8);
        const double ed2 = expect(p, [](double y) {
            const double d = sx::unit_deviance(y, 0.3);
            return d * d;
        });
        CHECK(rel(ed2 - s * s, 2 * s * s) < 1e-7);
        CHECK(std::abs(expect(p, [](double y) { return (y - 0.3) * sx::unit_deviance(y, 0.3); })) < 1e-9);
    }
}

TEST_CASE("variance function")
{
    CHECK(sx::variance_function(0.5) == 0.015625);
    CHECK(sx::variance_function(1e-4) < 1e-11);
    CHECK(sx::variance_function(0.5) > sx::variance_function(0.49));
}

TEST_CASE("uni_fit")
{
    const UniParams truth(0.5, 2.0);
    const sx::QuantileTable q(truth);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> ys(5000);
    for (double& y : ys) y = q(u(rng));
    const auto fit = sx::uni_fit(ys);
    CHECK(std::abs(fit.params.mu() - 0.5) < 3 * fit.se_mu);
    CHECK(std::abs(fit.params.sigma2() - 2.0) < 4 * fit.se_sigma2);
    double dbar = 0.0;
    for (double y : ys) dbar += sx::unit_deviance(y, fit.params.mu());
    CHECK(rel(fit.params.sigma2(), dbar / ys.size()) < 1e-12);

    // mu solves the profile score equation.
    const double h = 1e-7;
    auto prof = [&](double mu) {
        double d = 0.0;
        for (double y : ys) d += sx::unit_deviance(y, mu);
        return sx::log_lik(ys, UniParams(mu, d / ys.size()));
    };
    CHECK(std::abs(prof(fit.params.mu() + h) - prof(fit.params.mu() - h)) / (2 * h) < 1e-2);

    CHECK_THROWS_AS(sx::uni_fit(std::vector<double>{0.4, 0.4, 0.4, 0.4}), EstimationError);
    CHECK_THROWS_AS(sx::uni_fit(std::vector<double>{0.4, 0.5}), EstimationError);
}

TEST_CASE("Fisher information")
{
    const UniParams p(0.5, 2.0);
    const auto K = sx::uni_fisher_info(p, 100);
    CHECK(K(0, 1) == 0.0);
    CHECK(K(1, 0) == 0.0);
    const double m3 = 0.015625;
    CHECK(rel(K(0, 0), 100 * (3 / 0.25 + 1 / (2 * m3))) < 1e-14);
    CHECK(rel(K(1, 1), 100 / (2 * 4.0)) < 1e-14);

    // Expected negated Hessian of log g by quadrature.
    for (double mu : {0.2, 0.5, 0.85}) {
        for (double s : {0.4, 2.0}) {
            const UniParams q(mu, s);
            const double h = 1e-4;
            auto lp = [](double y, double m, double ss) { return sx::log_pdf(y, UniParams(m, ss)); };
            const double kmm = expect(q, [&](double y) {
                return -(lp(y, mu + h, s) - 2 * lp(y, mu, s) + lp(y, mu - h, s)) / (h * h);
            });
            const double kss = expect(q, [&](double y) {
                return -(lp(y, mu, s + h) - 2 * lp(y, mu, s) + lp(y, mu, s - h)) / (h * h);
            });
            const auto Kq = sx::uni_fisher_info(q, 1);
            CHECK(rel(Kq(0, 0), kmm) < 1e-3);
            CHECK(rel(Kq(1, 1), kss) < 1e-3);
        }
    }
}
