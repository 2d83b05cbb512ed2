#include "bsimplex/bivariate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "bsimplex/errors.hpp"
#include "bsimplex/specfun.hpp"

namespace bsimplex {

namespace {

constexpr double kPi = std::numbers::pi;

// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            c_ += (sum_ - t) + x;
        } else {
            c_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

// Derivatives of log g in (mu, sigma2) for one observation.
struct LogDensityTerms {
    double value;
    double d_mu, d_s;
    double d_mumu, d_mus, d_ss;
};

LogDensityTerms log_density_terms(double y, const UniParams& p)
{
    const auto dev = simplex::unit_deviance_derivatives(y, p.mu());
    const double s = p.sigma2();
    return {simplex::log_pdf(y, p),
            -dev.d1 / (2.0 * s),
            -1.0 / (2.0 * s) + dev.d / (2.0 * s * s),
            -dev.d2 / (2.0 * s),
            dev.d1 / (2.0 * s * s),
            1.0 / (2.0 * s * s) - dev.d / (s * s * s)};
}

}  // namespace

const char* param_name(std::size_t index)
{
    static constexpr const char* kNames[kNumParams] = {"mu1", "mu2", "sigma2_1", "sigma2_2", "lambda"};
    if (index >= kNumParams) detail::domain_fail("param_name", "index out of range");
    return kNames[index];
}

MarginConstants MarginConstants::of(const UniParams& p)
{
    const double xi = 1.0 / p.mu() - 1.0;
    return {xi, (xi + 1.0) * (xi + 1.0) / (p.sigma2() * xi), 1.0 / std::sqrt(2.0 * kPi * p.sigma2())};
}

namespace bivariate {

double log_joint_pdf(double y1, double y2, const BivParams& th)
{
    const double f1 = simplex::cdf(y1, th.m1());
    const double f2 = simplex::cdf(y2, th.m2());
    const double copula_factor = copula::fgm_density(f1, f2, th.lam());
    return simplex::log_pdf(y1, th.m1()) + simplex::log_pdf(y2, th.m2()) + std::log(copula_factor);
}

double joint_pdf(double y1, double y2, const BivParams& th)
{
    const double f1 = simplex::cdf(y1, th.m1());
    const double f2 = simplex::cdf(y2, th.m2());
    return simplex::pdf(y1, th.m1()) * simplex::pdf(y2, th.m2()) * copula::fgm_density(f1, f2, th.lam());
}

Evaluation evaluate(const BivParams& th, const Dataset& data, Level level)
{
    const std::size_t n = data.size();
    if (n == 0) detail::domain_fail("log_lik", "dataset is empty");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&data](std::size_t a, std::size_t b) {
        return data[a].y1 < data[b].y1 || (data[a].y1 == data[b].y1 && data[a].y2 < data[b].y2);
    });

    const auto cdf_order = level == Level::Value         ? simplex::CdfOrder::Value
                           : level == Level::Score ? simplex::CdfOrder::First
                                                   : simplex::CdfOrder::Second;
    const std::vector<double> c1 = data.column1();
    const std::vector<double> c2 = data.column2();
    const auto F1 = simplex::cdf_derivatives(c1, th.m1(), cdf_order);
    const auto F2 = simplex::cdf_derivatives(c2, th.m2(), cdf_order);
    const double lam = th.lam();

    Evaluation ev;
    ev.boundary = std::abs(lam) >= 1.0;
    CompensatedSum total;
    for (const std::size_t i : order) {
        const auto& a = F1[i];
        const auto& b = F2[i];
        const double w1 = 1.0 - 2.0 * a.F;
        const double w2 = 1.0 - 2.0 * b.F;
        const double G = 1.0 + lam * w1 * w2;
        if (!(G > kCopulaFloor)) {
            ev.rejected = true;
            ev.loglik = kRejectedLogLik;
            ev.score.setZero();
            ev.info.setZero();
            return ev;
        }
        const auto t1 = log_density_terms(c1[i], th.m1());
        const auto t2 = log_density_terms(c2[i], th.m2());
        total.add(t1.value + t2.value + std::log(G));
        if (level == Level::Value) continue;

        // Derivatives of w = 1 - 2F.
        const double w1_mu = -2.0 * a.d_mu, w1_s = -2.0 * a.d_s;
        const double w2_mu = -2.0 * b.d_mu, w2_s = -2.0 * b.d_s;

        Vector5 g;
        g[kMu1] = lam * w2 * w1_mu;
        g[kSigma1] = lam * w2 * w1_s;
        g[kMu2] = lam * w1 * w2_mu;
        g[kSigma2] = lam * w1 * w2_s;
        g[kLambda] = w1 * w2;

        Vector5 u = g / G;
        u[kMu1] += t1.d_mu;
        u[kSigma1] += t1.d_s;
        u[kMu2] += t2.d_mu;
        u[kSigma2] += t2.d_s;
        ev.score += u;
        if (level == Level::Score) continue;

        Matrix5 H = Matrix5::Zero();
        H(kMu1, kMu1) = lam * w2 * (-2.0 * a.d_mumu);
        H(kMu1, kSigma1) = lam * w2 * (-2.0 * a.d_mus);
        H(kSigma1, kSigma1) = lam * w2 * (-2.0 * a.d_ss);
        H(kMu2, kMu2) = lam * w1 * (-2.0 * b.d_mumu);
        H(kMu2, kSigma2) = lam * w1 * (-2.0 * b.d_mus);
        H(kSigma2, kSigma2) = lam * w1 * (-2.0 * b.d_ss);
        H(kMu1, kMu2) = lam * w1_mu * w2_mu;
        H(kMu1, kSigma2) = lam * w1_mu * w2_s;
        H(kMu2, kSigma1) = lam * w1_s * w2_mu;
        H(kSigma1, kSigma2) = lam * w1_s * w2_s;
        H(kMu1, kLambda) = w2 * w1_mu;
        H(kSigma1, kLambda) = w2 * w1_s;
        H(kMu2, kLambda) = w1 * w2_mu;
        H(kSigma2, kLambda) = w1 * w2_s;

        // Hessian of log G (H holds the upper triangle of the Hessian of G),
        // then the marginal terms.
        H = H.selfadjointView<Eigen::Upper>();
        Matrix5 hess = H / G - (g * g.transpose()) / (G * G);
        hess(kMu1, kMu1) += t1.d_mumu;
        hess(kMu1, kSigma1) += t1.d_mus;
        hess(kSigma1, kMu1) += t1.d_mus;
        hess(kSigma1, kSigma1) += t1.d_ss;
        hess(kMu2, kMu2) += t2.d_mumu;
        hess(kMu2, kSigma2) += t2.d_mus;
        hess(kSigma2, kMu2) += t2.d_mus;
        hess(kSigma2, kSigma2) += t2.d_ss;
        ev.info -= hess;
    }
    ev.loglik = total.value();
    return ev;
}

double log_lik(const BivParams& th, const Dataset& data)
{
    return evaluate(th, data, Level::Value).loglik;
}

Vector5 score(const BivParams& th, const Dataset& data)
{
    const auto ev = evaluate(th, data, Level::Score);
    if (ev.rejected) detail::domain_fail("score", "copula factor is not positive at some observation");
    return ev.score;
}

Matrix5 observed_info(const BivParams& th, const Dataset& data)
{
    const auto ev = evaluate(th, data, Level::Information);
    if (ev.rejected) detail::domain_fail("observed_info", "copula factor is not positive at some observation");
    return ev.info;
}

double dependence_factor(const UniParams& p)
{
    // int y F(y) g(y) dy reduces through the K1 and K0 integral
    // representations to (mu/2) + (1/pi) mu (1 - mu) exp(2a) int_{2a}^inf K0.
    const MarginConstants c = MarginConstants::of(p);
    if (!(c.a >= specfun::kStruveAFloor)) {
        throw AccuracyError("joint_moment: a = " + std::to_string(c.a) + " is below the supported floor");
    }
    const double m = p.mu() * (1.0 - p.mu());
    return 2.0 / kPi * m * specfun::bessel_k0_tail_scaled(2.0 * c.a);
}

double joint_moment(const BivParams& th)
{
    const double base = th.m1().mu() * th.m2().mu();
    const double lam = th.lam();
    if (lam == 0.0) return base;
    return base + lam * dependence_factor(th.m1()) * dependence_factor(th.m2());
}

double published_dependence_factor(const UniParams& p)
{
    const MarginConstants c = MarginConstants::of(p);
    if (!(c.a >= specfun::kStruveAFloor)) {
        throw AccuracyError("published_joint_moment: a = " + std::to_string(c.a) + " is below the supported floor");
    }
    const double A = specfun::bessel_struve_A(c.a);
    return c.r * c.r * kPi / 2.0 * (1.0 / (c.a * c.xi) + 1.0 / c.a + A) - p.mu();
}

double published_joint_moment(const BivParams& th)
{
    const double base = th.m1().mu() * th.m2().mu();
    const double lam = th.lam();
    if (lam == 0.0) return base;
    return base + lam * published_dependence_factor(th.m1()) * published_dependence_factor(th.m2());
}

double covariance(const BivParams& th)
{
    const double lam = th.lam();
    if (lam == 0.0) return 0.0;
    return lam * dependence_factor(th.m1()) * dependence_factor(th.m2());
}

}  // namespace bivariate

}  // namespace bsimplex
