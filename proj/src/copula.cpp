#include "bsimplex/copula.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "bsimplex/errors.hpp"

namespace bsimplex {

Lambda::Lambda(double value) : value_(value)
{
    if (!std::isfinite(value) || std::abs(value) > 1.0 + kInputSlack) {
        detail::domain_fail("Lambda", "dependence parameter must lie in [-1, 1], got " + std::to_string(value));
    }
    if (value_ > 1.0) value_ = 1.0;
    if (value_ < -1.0) value_ = -1.0;
}

namespace copula {

namespace {

void require_closed_unit(const char* where, double u)
{
    if (!std::isfinite(u) || u < 0.0 || u > 1.0) {
        detail::domain_fail(where, "argument must lie in [0, 1], got " + std::to_string(u));
    }
}

void require_open_unit(const char* where, double u)
{
    if (!std::isfinite(u) || !(u > 0.0 && u < 1.0)) {
        detail::domain_fail(where, "argument must lie in (0, 1), got " + std::to_string(u));
    }
}

}  // namespace

double fgm_cdf(double u, double v, Lambda lam)
{
    require_closed_unit("fgm_cdf", u);
    require_closed_unit("fgm_cdf", v);
    return u * v + lam.value() * u * v * (1.0 - u) * (1.0 - v);
}

double fgm_density(double u, double v, Lambda lam)
{
    require_closed_unit("fgm_density", u);
    require_closed_unit("fgm_density", v);
    return 1.0 + lam.value() * (1.0 - 2.0 * u) * (1.0 - 2.0 * v);
}

double fgm_conditional_cdf(double u, double v, Lambda lam)
{
    require_closed_unit("fgm_conditional_cdf", u);
    require_closed_unit("fgm_conditional_cdf", v);
    return v * (1.0 + lam.value() * (1.0 - 2.0 * u) * (1.0 - v));
}

double conditional_inverse(double u1, double v, Lambda lam)
{
    require_open_unit("conditional_inverse", u1);
    require_open_unit("conditional_inverse", v);
    // With k = lambda (2 u1 - 1) the conditional CDF is v = u2 (1 - k (1 - u2)).
    // The root in (0, 1) is written without cancellation as 2v / (sqrt(B) - A).
    const double k = lam.value() * (2.0 * u1 - 1.0);
    const double a = k - 1.0;
    const double b = (1.0 - k) * (1.0 - k) + 4.0 * v * k;
    if (b < 0.0) throw AccuracyError("conditional_inverse: negative discriminant");
    assert(std::sqrt(b) - a > 0.0);
    return 2.0 * v / (std::sqrt(b) - a);
}

}  // namespace copula

}  // namespace bsimplex
