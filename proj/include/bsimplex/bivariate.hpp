#pragma once

// Bivariate Simplex distribution built from two Simplex marginals joined
// by the FGM copula:
//
//   f(y1, y2) = g1(y1) g2(y2) {1 + lambda [1 - 2 F1(y1)] [1 - 2 F2(y2)]}.
//
// Parameter vectors are ordered theta = (mu1, mu2, sigma1^2, sigma2^2, lambda).

#include <array>
#include <cstddef>

#include <Eigen/Core>

#include "bsimplex/copula.hpp"
#include "bsimplex/dataset.hpp"
#include "bsimplex/simplex.hpp"

namespace bsimplex {

inline constexpr std::size_t kNumParams = 5;

enum ParamIndex : std::size_t { kMu1 = 0, kMu2 = 1, kSigma1 = 2, kSigma2 = 3, kLambda = 4 };

// Short names used in tables and documents: mu1, mu2, sigma2_1, sigma2_2, lambda.
const char* param_name(std::size_t index);

using Vector5 = Eigen::Matrix<double, 5, 1>;
using Matrix5 = Eigen::Matrix<double, 5, 5>;

class BivParams {
public:
    BivParams(UniParams m1, UniParams m2, Lambda lam) : m1_(m1), m2_(m2), lam_(lam) {}
    BivParams(double mu1, double mu2, double sigma2_1, double sigma2_2, double lambda)
        : m1_(mu1, sigma2_1), m2_(mu2, sigma2_2), lam_(lambda)
    {
    }

    static BivParams from_array(const std::array<double, kNumParams>& v)
    {
        return BivParams(v[kMu1], v[kMu2], v[kSigma1], v[kSigma2], v[kLambda]);
    }
    static BivParams from_vector(const Vector5& v) { return BivParams(v[0], v[1], v[2], v[3], v[4]); }

    std::array<double, kNumParams> to_array() const
    {
        return {m1_.mu(), m2_.mu(), m1_.sigma2(), m2_.sigma2(), lam_.value()};
    }
    Vector5 to_vector() const
    {
        const auto a = to_array();
        return Vector5(a.data());
    }

    const UniParams& m1() const { return m1_; }
    const UniParams& m2() const { return m2_; }
    const UniParams& margin(int m) const { return m == 1 ? m1_ : m2_; }
    Lambda lam() const { return lam_; }

    bool operator==(const BivParams& o) const { return to_array() == o.to_array(); }

private:
    UniParams m1_;
    UniParams m2_;
    Lambda lam_;
};

// Per-margin constants of the closed-form joint moment.
struct MarginConstants {
    double xi;  // 1/mu - 1
    double a;   // (xi + 1)^2 / (sigma2 xi) = 1 / (sigma2 mu (1 - mu))
    double r;   // 1 / (sigma sqrt(2 pi))

    static MarginConstants of(const UniParams& p);
};

struct ThetaDerived {
    MarginConstants m1;
    MarginConstants m2;

    static ThetaDerived of(const BivParams& th) { return {MarginConstants::of(th.m1()), MarginConstants::of(th.m2())}; }
};

namespace bivariate {

// Log-likelihood value reported when the copula factor is not positive at
// some observation. Finite so line searches can compare against it.
inline constexpr double kRejectedLogLik = -1e300;
inline constexpr double kCopulaFloor = 1e-12;

double joint_pdf(double y1, double y2, const BivParams& th);
double log_joint_pdf(double y1, double y2, const BivParams& th);

enum class Level { Value, Score, Information };

struct Evaluation {
    double loglik = 0.0;
    bool rejected = false;  // copula factor <= kCopulaFloor somewhere
    bool boundary = false;  // |lambda| = 1: lambda derivatives are one-sided
    Vector5 score = Vector5::Zero();
    Matrix5 info = Matrix5::Zero();  // observed information, -Hessian
};

// Log-likelihood and, on request, its gradient and negated Hessian. The
// marginal CDFs and their parameter derivatives are computed once and
// shared by all entries. Observations are accumulated in (y1, y2) order, so
// the result does not depend on the order of the dataset rows.
Evaluation evaluate(const BivParams& th, const Dataset& data, Level level);

double log_lik(const BivParams& th, const Dataset& data);

// Throw DomainError when the likelihood is rejected at th.
Vector5 score(const BivParams& th, const Dataset& data);
Matrix5 observed_info(const BivParams& th, const Dataset& data);

// E[y1 y2] in closed form:
//   mu1 mu2 + lambda B(m1) B(m2),
//   B(m) = (2/pi) mu (1 - mu) exp(2a) int_{2a}^inf K0(t) dt.
double joint_moment(const BivParams& th);

// B(m) = int y [2 F(y) - 1] g(y) dy = 2 Cov(Y, F(Y)) > 0; E[y1 y2] is affine
// in lambda with slope B(m1) B(m2).
double dependence_factor(const UniParams& p);

// The moment formula exactly as published, with bracket
// r^2 pi / 2 (1/(a xi) + 1/a + A) - mu per margin. Kept for comparison; it
// does not equal the moment of the distribution.
double published_joint_moment(const BivParams& th);
double published_dependence_factor(const UniParams& p);

// joint_moment - mu1 mu2.
double covariance(const BivParams& th);

}  // namespace bivariate

}  // namespace bsimplex
