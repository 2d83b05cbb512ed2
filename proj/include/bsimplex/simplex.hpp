#pragma once

// Univariate Simplex distribution S(mu, sigma2) on (0, 1):
//
//   g(y) = {2 pi sigma2 [y(1-y)]^3}^{-1/2} exp{-d(y; mu) / (2 sigma2)},
//   d(y; mu) = (y - mu)^2 / [y (1-y) mu^2 (1-mu)^2].
//
// The CDF has no closed form. It is integrated in logit space, where the
// integrand g(y) y (1-y) is smooth and decays double-exponentially at both
// ends, with adaptive Gauss-Kronrod panels split at fixed breakpoints
// around the mode. The same machinery integrates the first and second
// parameter derivatives of g, which the bivariate score and information
// need.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bsimplex {

class UniParams {
public:
    // Throws DomainError unless 0 < mu < 1 and sigma2 > 0, both finite.
    UniParams(double mu, double sigma2);

    double mu() const { return mu_; }
    double sigma2() const { return sigma2_; }

    friend bool operator==(const UniParams&, const UniParams&) = default;

private:
    double mu_;
    double sigma2_;
};

namespace simplex {

// Throws DomainError unless 0 < y < 1.
void require_unit(const char* where, double y);

double unit_deviance(double y, double mu);

// d(y; mu) and its first two derivatives in mu.
struct DevianceDerivatives {
    double d;
    double d1;
    double d2;
};
DevianceDerivatives unit_deviance_derivatives(double y, double mu);

double pdf(double y, const UniParams& p);
double log_pdf(double y, const UniParams& p);

// 0 for y <= 0, 1 for y >= 1; quadrature otherwise.
double cdf(double y, const UniParams& p);

// Inverse CDF for 0 < u < 1; result strictly inside (0, 1).
double quantile(double u, const UniParams& p);

double mean(const UniParams& p);
double variance(const UniParams& p);
double variance_function(double mu);

double log_lik(std::span<const double> data, const UniParams& p);

// CDF value plus its derivatives in (mu, sigma2), obtained by integrating
// the analytically differentiated density.
struct CdfDerivatives {
    double F = 0.0;
    double d_mu = 0.0;
    double d_s = 0.0;
    double d_mumu = 0.0;
    double d_mus = 0.0;
    double d_ss = 0.0;
};

enum class CdfOrder { Value, First, Second };

// Evaluates at every point of ys (any order, values in (0, 1)). The cost
// is one pass of panel integration over the sorted points.
std::vector<CdfDerivatives> cdf_derivatives(std::span<const double> ys, const UniParams& p,
                                            CdfOrder order = CdfOrder::Second);

std::vector<double> cdf_many(std::span<const double> ys, const UniParams& p);

// Tabulated CDF on a logit grid for repeated inversion. Each inversion
// refines inside one table cell with exact panel integrals, so accuracy
// does not depend on the table resolution.
class QuantileTable {
public:
    explicit QuantileTable(const UniParams& p, std::size_t resolution = 400);

    double operator()(double u) const;
    const UniParams& params() const { return params_; }

private:
    UniParams params_;
    std::vector<double> t_;
    std::vector<double> F_;
};

struct UniFit {
    UniParams params;
    double se_mu;
    double se_sigma2;
    double loglik;
};

// Maximum likelihood for an iid sample. mu maximizes the profile
// likelihood over logit(mu); sigma2 is the mean unit deviance at mu.
UniFit uni_fit(std::span<const double> data);

// Expected information for n observations; diagonal.
Eigen::Matrix2d uni_fisher_info(const UniParams& p, std::size_t n);

}  // namespace simplex

}  // namespace bsimplex
