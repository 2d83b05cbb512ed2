#include "bsimplex/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "bsimplex/errors.hpp"
#include "bsimplex/quadrature.hpp"
#include "bsimplex/specfun.hpp"

namespace bsimplex {

UniParams::UniParams(double mu, double sigma2) : mu_(mu), sigma2_(sigma2)
{
    if (!std::isfinite(mu) || !(mu > 0.0 && mu < 1.0)) {
        detail::domain_fail("UniParams", "mu must lie in (0, 1), got " + std::to_string(mu));
    }
    if (!std::isfinite(sigma2) || !(sigma2 > 0.0)) {
        detail::domain_fail("UniParams", "sigma2 must be positive, got " + std::to_string(sigma2));
    }
}

namespace simplex {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLargestBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double logit(double y) { return std::log(y) - std::log1p(-y); }

// Integration range in logit space. Below/above it the density underflows
// for every admissible parameter; the margin grows with sigma2 because mass
// moves towards the boundaries as the dispersion increases.
double logit_limit(const UniParams& p)
{
    return 60.0 + std::max(0.0, std::log(p.sigma2())) + 2.0 * std::abs(logit(p.mu()));
}

// Density integrand in logit coordinates, optionally with derivative terms
// in (mu, sigma2). Component 0 is g(y) y(1-y).
template <std::size_t N>
class LogitIntegrand {
public:
    explicit LogitIntegrand(const UniParams& p)
        : mu_(p.mu()),
          s_(p.sigma2()),
          log_r_(-0.5 * std::log(2.0 * kPi * p.sigma2())),
          m_(p.mu() * (1.0 - p.mu())),
          mp_(1.0 - 2.0 * p.mu()),
          t0_(logit(p.mu())),
          cosh_half_t0_(std::cosh(0.5 * t0_))
    {
        q_ = 1.0 / (m_ * m_);
        q1_ = -2.0 * mp_ / (m_ * m_ * m_);
        q2_ = 6.0 * mp_ * mp_ / (m_ * m_ * m_ * m_) + 4.0 / (m_ * m_ * m_);
    }

    quadrature::Vec<N> operator()(double t) const
    {
        const double y = logistic(t);
        const double ym = logistic(-t);
        // y - mu without cancellation near the mode, so the mu-derivative
        // keeps full relative accuracy where it crosses zero.
        const double e = std::sinh(0.5 * (t - t0_)) / (2.0 * std::cosh(0.5 * t) * cosh_half_t0_);
        const double log_w = -std::log1p(std::exp(-t)) - std::log1p(std::exp(t));
        const double w = y * ym;
        const double d = e * e * q_ / w;
        const double h = std::exp(log_r_ - 0.5 * log_w - d / (2.0 * s_));

        quadrature::Vec<N> out{};
        out[0] = h;
        if constexpr (N >= 3) {
            const double d1 = (-2.0 * e * q_ + e * e * q1_) / w;
            const double lmu = -d1 / (2.0 * s_);
            const double ls = -1.0 / (2.0 * s_) + d / (2.0 * s_ * s_);
            out[1] = h * lmu;
            out[2] = h * ls;
            if constexpr (N >= 6) {
                const double d2 = (2.0 * q_ - 4.0 * e * q1_ + e * e * q2_) / w;
                const double lmumu = -d2 / (2.0 * s_);
                const double lmus = d1 / (2.0 * s_ * s_);
                const double lss = 1.0 / (2.0 * s_ * s_) - d / (s_ * s_ * s_);
                out[3] = h * (lmu * lmu + lmumu);
                out[4] = h * (lmu * ls + lmus);
                out[5] = h * (ls * ls + lss);
            }
        }
        return out;
    }

private:
    double mu_;
    double s_;
    double log_r_;
    double m_;
    double mp_;
    double t0_;
    double cosh_half_t0_;
    double q_ = 0.0;
    double q1_ = 0.0;
    double q2_ = 0.0;
};

// Panel boundaries: a fixed logit ladder plus a fine ladder around the mode
// scaled to the local spread sigma sqrt(mu(1-mu)).
std::vector<double> panel_breaks(const UniParams& p)
{
    const double lim = logit_limit(p);
    const double center = logit(p.mu());
    const double spread = std::clamp(std::sqrt(p.sigma2() * p.mu() * (1.0 - p.mu())), 1e-4, 4.0);

    std::vector<double> breaks{-lim, lim};
    for (double v : {0.0, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0, 45.0, 60.0}) {
        breaks.push_back(v);
        breaks.push_back(-v);
    }
    for (int k = -10; k <= 10; ++k) breaks.push_back(center + spread * k);

    std::erase_if(breaks, [lim](double b) { return b < -lim || b > lim; });
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    return breaks;
}

// Running integral of the integrand from -limit up to each sorted target.
template <std::size_t N>
void cumulative(const UniParams& p, std::span<const double> sorted_t, std::vector<quadrature::Vec<N>>& out)
{
    const LogitIntegrand<N> f(p);
    const std::vector<double> breaks = panel_breaks(p);
    const double lo = breaks.front();
    const double hi = breaks.back();

    // Absolute floor for the derivative components: a small fraction of
    // int |f_k| over the whole range. Short pieces where a component crosses
    // zero would otherwise chase its rounding noise. The density itself is
    // positive and keeps full relative accuracy into the tails.
    quadrature::Vec<N> floor{};
    for (std::size_t i = 1; i < breaks.size(); ++i) {
        const auto panel = quadrature::detail::gk15<N>(f, breaks[i - 1], breaks[i]);
        for (std::size_t k = 1; k < N; ++k) floor[k] += 1e-14 * panel.magnitude[k];
    }

    out.assign(sorted_t.size(), quadrature::Vec<N>{});
    quadrature::Vec<N> acc{};
    double cur = lo;
    std::size_t bi = 1;
    auto advance = [&](double to) {
        if (to <= cur) return;
        const auto piece = quadrature::integrate<N>(f, cur, to, {}, floor);
        for (std::size_t k = 0; k < N; ++k) acc[k] += piece[k];
        cur = to;
    };
    for (std::size_t j = 0; j < sorted_t.size(); ++j) {
        const double target = std::clamp(sorted_t[j], lo, hi);
        while (bi < breaks.size() && breaks[bi] < target) advance(breaks[bi++]);
        advance(target);
        out[j] = acc;
    }
}

template <std::size_t N>
std::vector<quadrature::Vec<N>> evaluate_at(std::span<const double> ys, const UniParams& p)
{
    std::vector<double> t(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        require_unit("cdf", ys[i]);
        t[i] = logit(ys[i]);
    }
    std::vector<std::size_t> order(ys.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&t](std::size_t a, std::size_t b) { return t[a] < t[b]; });
    std::vector<double> sorted(ys.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = t[order[i]];

    std::vector<quadrature::Vec<N>> cum;
    cumulative<N>(p, sorted, cum);
    std::vector<quadrature::Vec<N>> result(ys.size());
    for (std::size_t i = 0; i < order.size(); ++i) result[order[i]] = cum[i];
    return result;
}

}  // namespace

void require_unit(const char* where, double y)
{
    if (!std::isfinite(y) || !(y > 0.0 && y < 1.0)) {
        detail::domain_fail(where, "value must lie in (0, 1), got " + std::to_string(y));
    }
}

DevianceDerivatives unit_deviance_derivatives(double y, double mu)
{
    require_unit("unit_deviance", y);
    require_unit("unit_deviance", mu);
    const double m = mu * (1.0 - mu);
    const double mp = 1.0 - 2.0 * mu;
    const double q = 1.0 / (m * m);
    const double q1 = -2.0 * mp / (m * m * m);
    const double q2 = 6.0 * mp * mp / (m * m * m * m) + 4.0 / (m * m * m);
    const double e = y - mu;
    const double w = y * (1.0 - y);
    return {e * e * q / w, (-2.0 * e * q + e * e * q1) / w, (2.0 * q - 4.0 * e * q1 + e * e * q2) / w};
}

double unit_deviance(double y, double mu)
{
    return unit_deviance_derivatives(y, mu).d;
}

double log_pdf(double y, const UniParams& p)
{
    require_unit("log_pdf", y);
    const double w = y * (1.0 - y);
    const double d = unit_deviance(y, p.mu());
    return -0.5 * std::log(2.0 * kPi) - 0.5 * std::log(p.sigma2()) - 1.5 * std::log(w) - d / (2.0 * p.sigma2());
}

double pdf(double y, const UniParams& p)
{
    return std::exp(log_pdf(y, p));
}

double cdf(double y, const UniParams& p)
{
    if (std::isnan(y)) detail::domain_fail("cdf", "argument is NaN");
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    const double v = evaluate_at<1>(std::span<const double>(&y, 1), p)[0][0];
    return std::clamp(v, 0.0, 1.0);
}

std::vector<double> cdf_many(std::span<const double> ys, const UniParams& p)
{
    const auto raw = evaluate_at<1>(ys, p);
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::clamp(raw[i][0], 0.0, 1.0);
    return out;
}

std::vector<CdfDerivatives> cdf_derivatives(std::span<const double> ys, const UniParams& p, CdfOrder order)
{
    std::vector<CdfDerivatives> out(ys.size());
    switch (order) {
    case CdfOrder::Value: {
        const auto raw = evaluate_at<1>(ys, p);
        for (std::size_t i = 0; i < raw.size(); ++i) out[i].F = raw[i][0];
        break;
    }
    case CdfOrder::First: {
        const auto raw = evaluate_at<3>(ys, p);
        for (std::size_t i = 0; i < raw.size(); ++i) out[i] = {raw[i][0], raw[i][1], raw[i][2]};
        break;
    }
    case CdfOrder::Second: {
        const auto raw = evaluate_at<6>(ys, p);
        for (std::size_t i = 0; i < raw.size(); ++i) {
            out[i] = {raw[i][0], raw[i][1], raw[i][2], raw[i][3], raw[i][4], raw[i][5]};
        }
        break;
    }
    }
    return out;
}

QuantileTable::QuantileTable(const UniParams& p, std::size_t resolution) : params_(p)
{
    // Coarse pass over the panel breaks locates the effective support.
    const std::vector<double> breaks = panel_breaks(p);
    std::vector<quadrature::Vec<1>> coarse;
    cumulative<1>(p, breaks, coarse);
    std::size_t first = 0;
    while (first + 1 < breaks.size() && coarse[first + 1][0] <= 1e-300) ++first;
    std::size_t last = breaks.size() - 1;
    while (last > first + 1 && coarse[last - 1][0] >= 1.0 - 1e-16) --last;

    const double a = breaks[first];
    const double b = breaks[last];
    std::vector<double> nodes(breaks.begin(), breaks.end());
    resolution = std::max<std::size_t>(resolution, 2);
    for (std::size_t i = 0; i <= resolution; ++i) {
        nodes.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(resolution));
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    std::vector<quadrature::Vec<1>> cum;
    cumulative<1>(p, nodes, cum);
    t_ = std::move(nodes);
    F_.resize(cum.size());
    for (std::size_t i = 0; i < cum.size(); ++i) F_[i] = cum[i][0];
}

double QuantileTable::operator()(double u) const
{
    if (!std::isfinite(u) || !(u > 0.0 && u < 1.0)) {
        detail::domain_fail("quantile", "probability must lie in (0, 1), got " + std::to_string(u));
    }
    auto clamp_unit = [](double t) {
        return std::clamp(logistic(t), std::numeric_limits<double>::denorm_min(), kLargestBelowOne);
    };

    const auto it = std::upper_bound(F_.begin(), F_.end(), u);
    if (it == F_.end()) return clamp_unit(t_.back());
    if (it == F_.begin()) return clamp_unit(t_.front());
    const std::size_t k = static_cast<std::size_t>(it - F_.begin()) - 1;

    const LogitIntegrand<1> f(params_);
    double lo = t_[k];
    double hi = t_[k + 1];
    double f_lo = F_[k];
    const double f_hi = F_[k + 1];
    double t = lo + (hi - lo) * (u - f_lo) / (f_hi - f_lo);
    if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);

    for (int iter = 0; iter < 200; ++iter) {
        const double value = f_lo + quadrature::integrate<1>(f, lo, t)[0];
        const double resid = value - u;
        if (resid <= 0.0) {
            lo = t;
            f_lo = value;
        } else {
            hi = t;
        }
        if (std::abs(resid) <= 1e-15 * std::min(u, 1.0 - u)) break;
        const double dens = f(t)[0];
        double next = (dens > 0.0) ? t - resid / dens : 0.5 * (lo + hi);
        if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - t);
        t = next;
        if (step <= 1e-15 * std::max(1.0, std::abs(t)) || hi - lo <= 1e-15 * std::max(1.0, std::abs(t))) break;
    }
    return clamp_unit(t);
}

double quantile(double u, const UniParams& p)
{
    return QuantileTable(p)(u);
}

double mean(const UniParams& p)
{
    return p.mu();
}

double variance(const UniParams& p)
{
    const double mu = p.mu();
    const double m = mu * (1.0 - mu);
    const double c = 1.0 / (2.0 * p.sigma2() * m * m);
    // sqrt(1/(2 sigma2)) exp(c) Gamma(1/2, c), combined in log space.
    const double log_term = 0.5 * std::log(1.0 / (2.0 * p.sigma2())) + c + specfun::log_upper_inc_gamma(0.5, c);
    return m - std::exp(log_term);
}

double variance_function(double mu)
{
    require_unit("variance_function", mu);
    const double m = mu * (1.0 - mu);
    return m * m * m;
}

double log_lik(std::span<const double> data, const UniParams& p)
{
    double sum = 0.0;
    for (double y : data) sum += log_pdf(y, p);
    return sum;
}

UniFit uni_fit(std::span<const double> data)
{
    if (data.size() < 3) throw EstimationError("uni_fit: need at least 3 observations");
    for (double y : data) require_unit("uni_fit", y);
    const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
    if (*mn == *mx) throw EstimationError("uni_fit: all observations are identical");

    auto mean_dev = [&data](double mu) {
        double s = 0.0;
        for (double y : data) s += unit_deviance(y, mu);
        return s / static_cast<double>(data.size());
    };
    // The profile likelihood -n/2 log(mean deviance) is maximized where the
    // mean deviance is minimal; the minimizer lies inside the data range.
    auto objective = [&mean_dev](double eta) { return mean_dev(logistic(eta)); };
    const auto best = boost::math::tools::brent_find_minima(objective, logit(*mn), logit(*mx), 52);
    double mu = logistic(best.first);

    // Newton polish on the score equation sum d'(y; mu) = 0.
    for (int iter = 0; iter < 20; ++iter) {
        double g = 0.0;
        double h = 0.0;
        for (double y : data) {
            const auto dd = unit_deviance_derivatives(y, mu);
            g += dd.d1;
            h += dd.d2;
        }
        if (!(h > 0.0)) break;
        const double next = mu - g / h;
        if (!(next > *mn && next < *mx)) break;
        const bool done = std::abs(next - mu) < 1e-15;
        mu = next;
        if (done) break;
    }

    const double sigma2 = mean_dev(mu);
    if (!(sigma2 > 0.0)) throw EstimationError("uni_fit: degenerate dispersion estimate");
    const UniParams params(mu, sigma2);
    const Eigen::Matrix2d info = uni_fisher_info(params, data.size());
    return {params, 1.0 / std::sqrt(info(0, 0)), 1.0 / std::sqrt(info(1, 1)), log_lik(data, params)};
}

Eigen::Matrix2d uni_fisher_info(const UniParams& p, std::size_t n)
{
    if (n == 0) detail::domain_fail("uni_fisher_info", "n must be at least 1");
    const double mu = p.mu();
    const double s = p.sigma2();
    const double m = mu * (1.0 - mu);
    const double nn = static_cast<double>(n);
    Eigen::Matrix2d k = Eigen::Matrix2d::Zero();
    k(0, 0) = 3.0 * nn / m + nn / (s * m * m * m);
    // -E[d2 l / d sigma2^2] = -n/(2 s^2) + n E[d] / s^3 with E[d] = s.
    k(1, 1) = nn / (2.0 * s * s);
    return k;
}

}  // namespace simplex

}  // namespace bsimplex
