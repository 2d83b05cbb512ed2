#include "bsimplex/specfun.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bsimplex/errors.hpp"
#include "bsimplex/quadrature.hpp"

namespace bsimplex::specfun {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = std::numbers::egamma;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSeriesTol = 1e-16;

// Above this argument K0/K1 underflow; we return 0.
constexpr double kKUnderflow = 700.0;
// Struve L: ascending series below, I + M asymptotic decomposition above.
constexpr double kStruveSeriesMax = 40.0;
// I0/I1: ascending series below, Hankel asymptotic above.
constexpr double kBesselISeriesMax = 50.0;
// Tail of K0: (pi/2)(1 - zS(z)) up to the first crossover (cancellation
// grows like e^z), direct quadrature up to the second, Bickley asymptotic
// beyond it (its smallest term is about e^-z).
constexpr double kTailSeriesMax = 2.0;
constexpr double kTailAsymptoticMin = 40.0;

std::atomic<double> g_struve_perturbation{0.0};

double perturbed(double v)
{
    return v * (1.0 + g_struve_perturbation.load(std::memory_order_relaxed));
}

void require_positive(const char* where, double x)
{
    if (!std::isfinite(x) || !(x > 0.0)) {
        detail::domain_fail(where, "argument must be positive and finite, got " + std::to_string(x));
    }
}

void require_nonnegative(const char* where, double x)
{
    if (!std::isfinite(x) || x < 0.0) {
        detail::domain_fail(where, "argument must be non-negative and finite, got " + std::to_string(x));
    }
}

[[noreturn]] void series_cap(const char* where)
{
    throw AccuracyError(std::string(where) + ": series did not converge within "
                        + std::to_string(kMaxSeriesTerms) + " terms");
}

struct KPair {
    double k0;
    double k1;
};

// Ascending series (DLMF 10.31.1) for 0 < x <= 2.
KPair k_series(double x)
{
    const double t = 0.25 * x * x;
    const double log_half = std::log(0.5 * x);

    double term0 = 1.0;           // t^k / (k!)^2
    double term1 = 1.0;           // t^k / (k! (k+1)!)
    double harmonic = 0.0;        // H_k
    double i0 = 1.0;
    double h_sum = 0.0;           // sum_k>=1 t^k H_k / (k!)^2
    double i1_sum = 1.0;
    double psi_sum = (-kEulerGamma) + (1.0 - kEulerGamma);  // psi(1) + psi(2)
    for (int k = 1; k < kMaxSeriesTerms; ++k) {
        harmonic += 1.0 / k;
        term0 *= t / (static_cast<double>(k) * k);
        term1 *= t / (static_cast<double>(k) * (k + 1));
        i0 += term0;
        h_sum += term0 * harmonic;
        i1_sum += term1;
        const double psi_k1 = -kEulerGamma + harmonic;
        const double psi_k2 = psi_k1 + 1.0 / (k + 1);
        psi_sum += (psi_k1 + psi_k2) * term1;
        if (term0 < kSeriesTol * i0 && term1 * (harmonic + 1.0) < kSeriesTol * std::abs(psi_sum)) {
            const double i1 = 0.5 * x * i1_sum;
            return {-(log_half + kEulerGamma) * i0 + h_sum,
                    1.0 / x + log_half * i1 - 0.25 * x * psi_sum};
        }
    }
    series_cap("bessel_k series");
}

// Steed's continued fraction (CF2) for x > 2; returns exp(x)-scaled values.
KPair k_cf2_scaled(double x)
{
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 1;
    for (; i < kMaxSeriesTerms; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0);
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < kEps) break;
    }
    if (i == kMaxSeriesTerms) series_cap("bessel_k continued fraction");
    h *= a1;
    const double k0 = std::sqrt(kPi / (2.0 * x)) / s;
    const double k1 = k0 * (x + 0.5 - h) / x;
    return {k0, k1};
}

KPair k_scaled(double x)
{
    if (x <= 2.0) {
        const KPair k = k_series(x);
        const double e = std::exp(x);
        return {k.k0 * e, k.k1 * e};
    }
    return k_cf2_scaled(x);
}

KPair k_plain(double x)
{
    if (x <= 2.0) return k_series(x);
    if (x > kKUnderflow) return {0.0, 0.0};
    const KPair k = k_cf2_scaled(x);
    const double e = std::exp(-x);
    return {k.k0 * e, k.k1 * e};
}

// Hankel expansion of exp(-x) I_nu(x) for nu in {0, 1}.
double bessel_i_scaled_asymptotic(int nu, double x)
{
    const double four_nu2 = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < kMaxSeriesTerms; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * (odd * odd - four_nu2) / (8.0 * k * x);
        if (std::abs(next) >= std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) < kSeriesTol * std::abs(sum)) break;
    }
    return sum / std::sqrt(2.0 * kPi * x);
}

double bessel_i_series(int nu, double x)
{
    const double t = 0.25 * x * x;
    double term = (nu == 0) ? 1.0 : 0.5 * x;
    double sum = term;
    for (int k = 1; k < kMaxSeriesTerms; ++k) {
        term *= t / (static_cast<double>(k) * (k + nu));
        sum += term;
        if (term < kSeriesTol * sum) return sum;
    }
    series_cap("bessel_i series");
}

double bessel_i(int nu, double x)
{
    if (x <= kBesselISeriesMax) return bessel_i_series(nu, x);
    if (x > 709.0) throw OverflowError("bessel_i: result exceeds double range");
    return bessel_i_scaled_asymptotic(nu, x) * std::exp(x);
}

// Ascending series for L_nu, nu in {0, -1}. All terms are positive.
double struve_series(int nu, double x)
{
    const double half = 0.5 * x;
    const double h2 = half * half;
    double term = (nu == 0) ? 2.0 * x / kPi : 2.0 / kPi;
    double sum = term;
    for (int k = 1; k < kMaxSeriesTerms; ++k) {
        const double kk = static_cast<double>(k);
        const double ratio = (nu == 0) ? h2 / ((kk + 0.5) * (kk + 0.5)) : h2 / ((kk + 0.5) * (kk - 0.5));
        term *= ratio;
        sum += term;
        if (ratio < 1.0 && term <= kSeriesTol * sum) return sum;
    }
    series_cap("struve series");
}

// Asymptotic expansion of M_nu = L_nu - I_nu for large x, nu in {0, -1}.
double struve_m_asymptotic(int nu, double x)
{
    const double x2 = x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < kMaxSeriesTerms; ++k) {
        const double kk = static_cast<double>(k);
        const double ratio = (nu == 0) ? (2.0 * kk - 1.0) * (2.0 * kk - 1.0) / x2 : (4.0 * kk * kk - 1.0) / x2;
        if (ratio >= 1.0) break;
        term *= ratio;
        sum += term;
        if (term < kSeriesTol * sum) break;
    }
    return (nu == 0) ? -2.0 / (kPi * x) * sum : 2.0 / (kPi * x2) * sum;
}

double struve(int nu, double x)
{
    if (x <= kStruveSeriesMax) return struve_series(nu, x);
    const double m = struve_m_asymptotic(nu, x);
    return bessel_i(nu == 0 ? 0 : 1, x) + m;
}

// exp(z) * int_z^inf K0(t) dt via the Bickley-function expansion.
double k0_tail_scaled_asymptotic(double z)
{
    double a = 1.0;   // a_k(0) of the Hankel expansion of K0
    double b = 1.0;   // b_k of the tail expansion
    double zk = 1.0;
    double sum = 1.0;
    double last = 1.0;
    for (int k = 1; k < kMaxSeriesTerms; ++k) {
        const double odd = 2.0 * k - 1.0;
        a *= -(odd * odd) / (8.0 * k);
        b = a - (k - 0.5) * b;
        zk *= z;
        const double term = b / zk;
        if (std::abs(term) >= std::abs(last)) break;
        sum += term;
        last = term;
        if (std::abs(term) < kSeriesTol * std::abs(sum)) break;
    }
    return std::sqrt(kPi / (2.0 * z)) * sum;
}

// exp(z) * int_z^inf K0(t) dt = int_0^inf exp(-z (cosh u - 1)) / cosh u du.
double k0_tail_scaled_quadrature(double z)
{
    const double upper = std::acosh(1.0 + 745.0 / z);
    auto f = [z](double u) {
        const double c = std::cosh(u);
        return std::exp(-z * 2.0 * std::pow(std::sinh(0.5 * u), 2)) / c;
    };
    return quadrature::integrate_scalar(f, 0.0, upper, {1e-14, 1e-300, 40});
}

double k0_tail_scaled_impl(double z)
{
    if (z <= kTailSeriesMax) return std::exp(z) * 0.5 * kPi * (1.0 - z * bessel_struve_product(z));
    if (z <= kTailAsymptoticMin) return k0_tail_scaled_quadrature(z);
    return k0_tail_scaled_asymptotic(z);
}

}  // namespace

double bessel_k0(double x)
{
    require_positive("bessel_k0", x);
    return k_plain(x).k0;
}

double bessel_k1(double x)
{
    require_positive("bessel_k1", x);
    return k_plain(x).k1;
}

double bessel_k0_scaled(double x)
{
    require_positive("bessel_k0_scaled", x);
    return k_scaled(x).k0;
}

double bessel_k1_scaled(double x)
{
    require_positive("bessel_k1_scaled", x);
    return k_scaled(x).k1;
}

double bessel_k_half(double x)
{
    require_positive("bessel_k_half", x);
    return std::sqrt(kPi / (2.0 * x)) * std::exp(-x);
}

double bessel_i0(double x)
{
    require_nonnegative("bessel_i0", x);
    return bessel_i(0, x);
}

double bessel_i1(double x)
{
    require_nonnegative("bessel_i1", x);
    return bessel_i(1, x);
}

double struve_l0(double x)
{
    require_nonnegative("struve_l0", x);
    return perturbed(struve(0, x));
}

double struve_lm1(double x)
{
    require_nonnegative("struve_lm1", x);
    return perturbed(struve(-1, x));
}

double bessel_struve_product(double z)
{
    require_positive("bessel_struve_product", z);
    if (z <= kStruveSeriesMax) {
        const KPair k = k_plain(z);
        return k.k0 * struve_lm1(z) + k.k1 * struve_l0(z);
    }
    // Wronskian I0 K1 + I1 K0 = 1/z removes the exponentially large parts.
    const KPair k = k_plain(z);
    const double s = 1.0 / z + k.k0 * struve_m_asymptotic(-1, z) + k.k1 * struve_m_asymptotic(0, z);
    return perturbed(s);
}

double bessel_k0_antiderivative(double z)
{
    require_nonnegative("bessel_k0_antiderivative", z);
    if (z == 0.0) return 0.0;
    return 0.5 * kPi * z * bessel_struve_product(z);
}

double bessel_struve_A(double a)
{
    require_positive("bessel_struve_A", a);
    if (a < kStruveAFloor) {
        throw OverflowError("bessel_struve_A: argument below documented floor "
                            + std::to_string(kStruveAFloor));
    }
    return 1.0 - 2.0 * bessel_struve_product(2.0 * a);
}

double bessel_k0_tail_scaled(double z)
{
    require_nonnegative("bessel_k0_tail_scaled", z);
    if (z == 0.0) return 0.5 * kPi;
    return k0_tail_scaled_impl(z);
}

double bessel_k0_tail(double z)
{
    require_nonnegative("bessel_k0_tail", z);
    if (z == 0.0) return 0.5 * kPi;
    if (z <= kTailSeriesMax) return 0.5 * kPi * (1.0 - z * bessel_struve_product(z));
    return std::exp(-z) * k0_tail_scaled_impl(z);
}

double log_upper_inc_gamma(double s, double x)
{
    if (!std::isfinite(s) || !(s > 0.0)) detail::domain_fail("upper_inc_gamma", "s must be positive");
    require_nonnegative("upper_inc_gamma", x);
    const double lgam = std::lgamma(s);
    if (x == 0.0) return lgam;

    if (x < s + 1.0) {
        // Lower series: gamma(s, x) = e^-x x^s sum_n x^n / (s (s+1) ... (s+n)).
        double ap = s;
        double del = 1.0 / s;
        double sum = del;
        int n = 1;
        for (; n < kMaxSeriesTerms; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * kSeriesTol) break;
        }
        if (n == kMaxSeriesTerms) series_cap("upper_inc_gamma series");
        const double p = std::exp(-x + s * std::log(x) - lgam) * sum;
        return lgam + std::log1p(-p);
    }

    // Modified Lentz evaluation of the continued fraction.
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    int i = 1;
    for (; i < kMaxSeriesTerms; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    if (i == kMaxSeriesTerms) series_cap("upper_inc_gamma continued fraction");
    return -x + s * std::log(x) + std::log(h);
}

double upper_inc_gamma(double s, double x)
{
    return std::exp(log_upper_inc_gamma(s, x));
}

double erf(double x)
{
    if (!std::isfinite(x)) detail::domain_fail("erf", "argument must be finite");
    return std::erf(x);
}

namespace testing {

void set_struve_perturbation(double relative)
{
    g_struve_perturbation.store(relative, std::memory_order_relaxed);
}

double struve_perturbation()
{
    return g_struve_perturbation.load(std::memory_order_relaxed);
}

}  // namespace testing

}  // namespace bsimplex::specfun
