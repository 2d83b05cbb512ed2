#pragma once

// Special functions on the positive real axis used by the Simplex variance
// and the closed-form joint moment: modified Bessel K0, K1, K_{1/2},
// modified Struve L0, L_{-1}, the upper incomplete gamma function and erf.
//
// All functions are pure and reentrant. Domain violations throw
// DomainError, series that fail to converge within the term cap throw
// AccuracyError.

namespace bsimplex::specfun {

// Hard cap on the number of terms summed by any series in this module.
inline constexpr int kMaxSeriesTerms = 500;

// Smallest argument accepted by bessel_struve_A; below it the result
// diverges logarithmically and OverflowError is thrown.
inline constexpr double kStruveAFloor = 1e-10;

double bessel_k0(double x);
double bessel_k1(double x);

// exp(x) * K_nu(x); finite for all x > 0 (no underflow).
double bessel_k0_scaled(double x);
double bessel_k1_scaled(double x);

// Closed form sqrt(pi / (2x)) * exp(-x).
double bessel_k_half(double x);

double bessel_i0(double x);
double bessel_i1(double x);

// Modified Struve functions L0 and L_{-1}. Throws OverflowError once the
// result exceeds double range (x above roughly 713).
double struve_l0(double x);
double struve_lm1(double x);

// S(z) = K0(z) L_{-1}(z) + K1(z) L0(z). For large z this equals
// 1/z + K0 M_{-1} + K1 M0 with M the Struve asymptotic remainder, which is
// evaluated instead of the (overflowing) product form.
double bessel_struve_product(double z);

// (pi/2) z S(z), the antiderivative of K0 vanishing at 0.
double bessel_k0_antiderivative(double z);

// A(a) = 1 - 2 S(2a).
double bessel_struve_A(double a);

// Tail integral of K0 over [z, inf) and its exp(z)-scaled variant.
double bessel_k0_tail(double z);
double bessel_k0_tail_scaled(double z);

// Gamma(s, x) = int_x^inf t^{s-1} e^{-t} dt and its logarithm.
double upper_inc_gamma(double s, double x);
double log_upper_inc_gamma(double s, double x);

double erf(double x);

namespace testing {

// Relative perturbation applied to every Struve evaluation; 0 in normal
// operation. Exists so the oracle battery can be shown to detect a broken
// special-function layer.
void set_struve_perturbation(double relative);
double struve_perturbation();

class ScopedStruvePerturbation {
public:
    explicit ScopedStruvePerturbation(double relative)
        : previous_(struve_perturbation())
    {
        set_struve_perturbation(relative);
    }
    ~ScopedStruvePerturbation() { set_struve_perturbation(previous_); }
    ScopedStruvePerturbation(const ScopedStruvePerturbation&) = delete;
    ScopedStruvePerturbation& operator=(const ScopedStruvePerturbation&) = delete;

private:
    double previous_;
};

}  // namespace testing

}  // namespace bsimplex::specfun
