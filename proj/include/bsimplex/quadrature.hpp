#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature for vector-valued integrands.
//
// Used by the Simplex CDF and its parameter derivatives. Each component k
// is accepted on a subinterval when |K15 - G7| <= rel_tol * int|f_k| +
// abs_tol, or when the error is at the roundoff level of the whole
// integral spread over the subinterval (components that cross zero inside
// a panel would otherwise never converge).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "bsimplex/errors.hpp"

namespace bsimplex::quadrature {

template <std::size_t N>
using Vec = std::array<double, N>;

struct Tolerance {
    double rel = 1e-12;
    double abs = 1e-250;
    int max_depth = 48;
    long max_splits = 1L << 16;  // per integrate call; AccuracyError beyond
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct PanelResult {
    Vec<N> value{};
    Vec<N> error{};
    Vec<N> magnitude{};
};

template <std::size_t N, class F>
PanelResult<N> gk15(const F& f, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    PanelResult<N> r;
    Vec<N> gauss{};

    const Vec<N> fc = f(center);
    for (std::size_t k = 0; k < N; ++k) {
        r.value[k] = fc[k] * kWgk[7];
        r.magnitude[k] = std::abs(fc[k]) * kWgk[7];
        gauss[k] = fc[k] * kWg[3];
    }
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const Vec<N> f1 = f(center - dx);
        const Vec<N> f2 = f(center + dx);
        for (std::size_t k = 0; k < N; ++k) {
            const double s = f1[k] + f2[k];
            r.value[k] += kWgk[j] * s;
            r.magnitude[k] += kWgk[j] * (std::abs(f1[k]) + std::abs(f2[k]));
            if (j % 2 == 1) gauss[k] += kWg[j / 2] * s;
        }
    }
    for (std::size_t k = 0; k < N; ++k) {
        r.value[k] *= half;
        r.magnitude[k] *= std::abs(half);
        r.error[k] = std::abs(r.value[k] - gauss[k] * half);
    }
    return r;
}

// Roundoff floor per unit length: a panel whose error is below
// noise[k] * width cannot be improved by further splitting.
template <std::size_t N, class F>
void adapt(const F& f, double a, double b, const PanelResult<N>& panel, const Tolerance& tol, const Vec<N>& noise,
           int depth, long& splits, Vec<N>& acc)
{
    bool ok = depth >= tol.max_depth || b - a <= 64.0 * 2.220446049250313e-16 * std::max(std::abs(a), std::abs(b));
    if (!ok) {
        ok = true;
        const double width = b - a;
        for (std::size_t k = 0; k < N; ++k) {
            if (panel.error[k] > tol.rel * panel.magnitude[k] + tol.abs + noise[k] * width) {
                ok = false;
                break;
            }
        }
    }
    if (ok) {
        for (std::size_t k = 0; k < N; ++k) acc[k] += panel.value[k];
        return;
    }
    if (++splits > tol.max_splits) throw AccuracyError("quadrature: subdivision budget exhausted");
    const double mid = 0.5 * (a + b);
    adapt<N>(f, a, mid, gk15<N>(f, a, mid), tol, noise, depth + 1, splits, acc);
    adapt<N>(f, mid, b, gk15<N>(f, mid, b), tol, noise, depth + 1, splits, acc);
}

}  // namespace detail

// Integral of f over [a, b]; f maps double -> Vec<N>. A panel is also
// accepted when its error in component k is below floor[k]; callers that
// integrate piecewise pass a floor tied to the size of the whole integral.
template <std::size_t N, class F>
Vec<N> integrate(const F& f, double a, double b, const Tolerance& tol = {}, const Vec<N>& floor = {})
{
    Vec<N> acc{};
    if (a == b) return acc;
    const auto top = detail::gk15<N>(f, a, b);
    Vec<N> noise{};
    for (std::size_t k = 0; k < N; ++k) {
        noise[k] = 64.0 * 2.220446049250313e-16 * top.magnitude[k] / std::abs(b - a) + floor[k] / std::abs(b - a);
    }
    long splits = 0;
    detail::adapt<N>(f, a, b, top, tol, noise, 0, splits, acc);
    return acc;
}

// Scalar convenience wrapper.
template <class F>
double integrate_scalar(const F& f, double a, double b, const Tolerance& tol = {})
{
    auto wrapped = [&f](double x) { return Vec<1>{f(x)}; };
    return integrate<1>(wrapped, a, b, tol)[0];
}

}  // namespace bsimplex::quadrature
