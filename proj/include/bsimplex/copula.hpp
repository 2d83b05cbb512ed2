#pragma once

// Farlie-Gumbel-Morgenstern copula C(u, v) = uv [1 + lambda (1-u)(1-v)].

namespace bsimplex {

// Dependence parameter in [-1, 1]. Inputs within 1e-12 outside the
// interval are clamped onto it; anything further out is a DomainError.
class Lambda {
public:
    static constexpr double kInputSlack = 1e-12;

    explicit Lambda(double value);

    double value() const { return value_; }
    operator double() const { return value_; }

private:
    double value_;
};

namespace copula {

double fgm_cdf(double u, double v, Lambda lam);

// Copula density 1 + lambda (1-2u)(1-2v).
double fgm_density(double u, double v, Lambda lam);

// dC/du, the conditional CDF of V given U = u.
double fgm_conditional_cdf(double u, double v, Lambda lam);

// Solves dC/du(u1, u2) = v for u2 in closed form; used to draw the second
// coordinate given the first.
double conditional_inverse(double u1, double v, Lambda lam);

}  // namespace copula

}  // namespace bsimplex
