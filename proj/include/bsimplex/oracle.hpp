#pragma once

// Independent numerical references. Everything here uses the Boost
// double-exponential quadrature rules and shares no integration code with
// the library proper, so agreement between the two is meaningful.

#include <functional>
#include <string>
#include <vector>

#include "bsimplex/bivariate.hpp"

namespace bsimplex::oracle {

// F(y) by tanh-sinh over logit space.
double marginal_cdf(double y, const UniParams& p);

// int_0^1 g; should be 1.
double marginal_mass(const UniParams& p);

// E[y1 y2] by direct integration of y1 y2 f(y1, y2). The FGM form makes
// the double integral separate exactly:
//   int int y1 y2 f = M1 M2 + lambda N1 N2,
//   M = int y g,  N = int y (1 - 2F) g,
// each a one-dimensional integral with F integrated inside it.
double numeric_joint_moment(const BivParams& th, double tol = 1e-11);

// Total mass of f, separated the same way; should be 1.
double normalization_scan(const BivParams& th);

// J0(a) = int_1^inf K0(a (q^2 + 1) / q) dq and
// J1(a) = int_1^inf K1(a (q^2 + 1) / q) / q dq, with K from Boost.
double numeric_j0(double a);
double numeric_j1(double a);

// Central differences with step h * max(1, |x_j|). Throws DomainError for
// h <= 0.
Vector5 numeric_gradient(const std::function<double(const Vector5&)>& f, const Vector5& x, double h = 1e-5);
Matrix5 numeric_hessian(const std::function<double(const Vector5&)>& f, const Vector5& x, double h = 1e-4);

struct CheckResult {
    std::string name;
    double got;
    double want;
    double rel_error;
    double tolerance;
    bool pass;
};

// Fixed battery comparing closed forms with the references above. The
// Struve perturbation hook can be set by the caller to confirm the battery
// notices a broken special function.
std::vector<CheckResult> battery();

}  // namespace bsimplex::oracle
