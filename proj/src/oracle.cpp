#include "bsimplex/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "bsimplex/errors.hpp"
#include "bsimplex/specfun.hpp"

namespace bsimplex::oracle {

namespace {

using boost::math::quadrature::exp_sinh;

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// g(y) dy/dt for y = logistic(t), written with y(1-y) = e^{-|t|}/(1+e^{-|t|})^2
// so neither tail loses precision.
struct LogitDensity {
    double mu, s, t0;

    explicit LogitDensity(const UniParams& p) : mu(p.mu()), s(p.sigma2()), t0(std::log(p.mu() / (1.0 - p.mu()))) {}

    double operator()(double t) const
    {
        const double e = std::exp(-std::abs(t));
        const double v = e / ((1.0 + e) * (1.0 + e));
        if (v == 0.0) return 0.0;
        const double y = logistic(t);
        const double m = mu * (1.0 - mu);
        const double d = (y - mu) * (y - mu) / (v * m * m);
        const double ld = -0.5 * std::log(2.0 * std::numbers::pi * s * v) - d / (2.0 * s);
        return std::exp(ld);
    }
};

// Integral of f over the real line, split at c.
template <class F>
double whole_line(const F& f, double c, double tol)
{
    exp_sinh<double> q;
    const double lo = q.integrate([&](double t) { return f(t); }, -INFINITY, c, tol);
    const double hi = q.integrate([&](double t) { return f(t); }, c, INFINITY, tol);
    return lo + hi;
}

double cdf_logit(double t, const LogitDensity& h, double tol)
{
    exp_sinh<double> q;
    if (t <= h.t0) return q.integrate([&](double x) { return h(x); }, -INFINITY, t, tol);
    return 1.0 - q.integrate([&](double x) { return h(x); }, t, INFINITY, tol);
}

// M = int y g and N = int y (1 - 2F) g.
std::pair<double, double> margin_moments(const UniParams& p, double tol)
{
    const LogitDensity h(p);
    const double inner_tol = tol * 1e-2;
    const double m = whole_line([&](double t) { return logistic(t) * h(t); }, h.t0, tol);
    const double n = whole_line(
        [&](double t) {
            const double ht = h(t);
            if (ht == 0.0) return 0.0;
            return logistic(t) * (1.0 - 2.0 * cdf_logit(t, h, inner_tol)) * ht;
        },
        h.t0, tol);
    return {m, n};
}

double check_finite(const char* where, double v)
{
    if (!std::isfinite(v)) throw AccuracyError(std::string(where) + ": quadrature did not produce a finite value");
    return v;
}

}  // namespace

double marginal_cdf(double y, const UniParams& p)
{
    simplex::require_unit("oracle::marginal_cdf", y);
    const LogitDensity h(p);
    return check_finite("oracle::marginal_cdf", cdf_logit(std::log(y / (1.0 - y)), h, 1e-12));
}

double marginal_mass(const UniParams& p)
{
    const LogitDensity h(p);
    return check_finite("oracle::marginal_mass", whole_line(h, h.t0, 1e-12));
}

double numeric_joint_moment(const BivParams& th, double tol)
{
    if (!(tol > 0.0)) detail::domain_fail("numeric_joint_moment", "tolerance must be positive");
    const auto [m1, n1] = margin_moments(th.m1(), tol);
    const double lam = th.lam();
    if (lam == 0.0) return check_finite("numeric_joint_moment", m1 * margin_moments(th.m2(), tol).first);
    const auto [m2, n2] = margin_moments(th.m2(), tol);
    return check_finite("numeric_joint_moment", m1 * m2 + lam * n1 * n2);
}

double normalization_scan(const BivParams& th)
{
    // int (1 - 2F) g = 0 exactly, but it is integrated rather than assumed.
    auto pieces = [](const UniParams& p) {
        const LogitDensity h(p);
        const double z = whole_line(h, h.t0, 1e-12);
        const double w = whole_line([&](double t) { return (1.0 - 2.0 * cdf_logit(t, h, 1e-13)) * h(t); }, h.t0,
                                    1e-10);
        return std::pair{z, w};
    };
    const auto [z1, w1] = pieces(th.m1());
    const auto [z2, w2] = pieces(th.m2());
    return check_finite("normalization_scan", z1 * z2 + th.lam() * w1 * w2);
}

double numeric_j0(double a)
{
    if (!(a > 0.0) || !std::isfinite(a)) detail::domain_fail("numeric_j0", "a must be positive");
    exp_sinh<double> q;
    auto f = [a](double u) { return boost::math::cyl_bessel_k(0, a * ((1.0 + u) + 1.0 / (1.0 + u))); };
    return check_finite("numeric_j0", q.integrate(f, 0.0, INFINITY, 1e-13));
}

double numeric_j1(double a)
{
    if (!(a > 0.0) || !std::isfinite(a)) detail::domain_fail("numeric_j1", "a must be positive");
    exp_sinh<double> q;
    auto f = [a](double u) { return boost::math::cyl_bessel_k(1, a * ((1.0 + u) + 1.0 / (1.0 + u))) / (1.0 + u); };
    return check_finite("numeric_j1", q.integrate(f, 0.0, INFINITY, 1e-13));
}

Vector5 numeric_gradient(const std::function<double(const Vector5&)>& f, const Vector5& x, double h)
{
    if (!(h > 0.0) || !std::isfinite(h)) detail::domain_fail("numeric_gradient", "step must be positive");
    Vector5 g;
    for (int j = 0; j < 5; ++j) {
        const double step = h * std::max(1.0, std::abs(x[j]));
        Vector5 xp = x, xm = x;
        xp[j] += step;
        xm[j] -= step;
        const double fp = f(xp), fm = f(xm);
        if (!std::isfinite(fp) || !std::isfinite(fm)) detail::domain_fail("numeric_gradient", "non-finite value");
        g[j] = (fp - fm) / (2.0 * step);
    }
    return g;
}

Matrix5 numeric_hessian(const std::function<double(const Vector5&)>& f, const Vector5& x, double h)
{
    if (!(h > 0.0) || !std::isfinite(h)) detail::domain_fail("numeric_hessian", "step must be positive");
    Vector5 step;
    for (int j = 0; j < 5; ++j) step[j] = h * std::max(1.0, std::abs(x[j]));
    auto at = [&](int i, double si, int j, double sj) {
        Vector5 y = x;
        y[i] += si * step[i];
        y[j] += sj * step[j];
        const double v = f(y);
        if (!std::isfinite(v)) detail::domain_fail("numeric_hessian", "non-finite value");
        return v;
    };
    const double f0 = f(x);
    if (!std::isfinite(f0)) detail::domain_fail("numeric_hessian", "non-finite value");
    Matrix5 H;
    for (int i = 0; i < 5; ++i) {
        H(i, i) = (at(i, 1, i, 1) - 2.0 * f0 + at(i, -1, i, -1)) / (4.0 * step[i] * step[i]);
        for (int j = i + 1; j < 5; ++j) {
            const double v = (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) /
                             (4.0 * step[i] * step[j]);
            H(i, j) = v;
            H(j, i) = v;
        }
    }
    return H;
}

std::vector<CheckResult> battery()
{
    std::vector<CheckResult> out;
    auto add = [&out](std::string name, double got, double want, double tol) {
        const double err = std::abs(got - want) / std::abs(want);
        out.push_back({std::move(name), got, want, err, tol, err <= tol});
    };
    const double pi = std::numbers::pi;
    for (double a : {0.5, 1.0, 2.0, 5.0}) {
        const std::string tag = "(a=" + std::to_string(a).substr(0, 3) + ")";
        const double j1 = pi / (4.0 * a) * std::exp(-2.0 * a);
        add("J1 closed form " + tag, j1, numeric_j1(a), 1e-6);
        const double j0 = j1 + std::exp(-2.0 * a) * specfun::bessel_k0_tail_scaled(2.0 * a) / (2.0 * a);
        add("J0 via K0 tail " + tag, j0, numeric_j0(a), 1e-6);
    }
    add("z(K0 L-1 + K1 L0) at z=200", 200.0 * specfun::bessel_struve_product(200.0), 1.0, 0.01);
    for (double z : {1.0, 2.0, 5.0}) {
        const double h = 1e-4;
        const double d =
            (specfun::bessel_k0_antiderivative(z + h) - specfun::bessel_k0_antiderivative(z - h)) / (2.0 * h);
        add("d/dz antiderivative = K0 (z=" + std::to_string(static_cast<int>(z)) + ")", d,
            boost::math::cyl_bessel_k(0, z), 1e-6);
    }
    const BivParams moment_points[] = {{0.5, 0.5, 2.0, 2.0, 1.0}, {0.3, 0.3, 0.5, 0.5, -1.0}, {0.9, 0.9, 5.0, 5.0, 1.0}};
    for (const auto& th : moment_points) {
        const auto v = th.to_array();
        std::string name = "E[y1 y2] closed form vs quadrature (";
        for (std::size_t i = 0; i < v.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof buf, i ? ", %g" : "%g", v[i]);
            name += buf;
        }
        add(name + ")", bivariate::joint_moment(th), numeric_joint_moment(th), 1e-5);
    }
    for (double mu : {0.1, 0.5, 0.9}) {
        const UniParams p(mu, 2.0);
        const std::string tag = "(mu=" + std::to_string(mu).substr(0, 3) + ", sigma2=2)";
        add("univariate mass " + tag, marginal_mass(p), 1.0, 1e-8);
        add("CDF at the mean " + tag, simplex::cdf(mu, p), marginal_cdf(mu, p), 1e-8);
    }
    add("bivariate mass (0.5, 0.5, 2, 2, 1)", normalization_scan({0.5, 0.5, 2.0, 2.0, 1.0}), 1.0, 1e-6);
    return out;
}

}  // namespace bsimplex::oracle
