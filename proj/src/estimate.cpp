#include "bsimplex/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <numeric>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/distributions/normal.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "bsimplex/errors.hpp"

namespace bsimplex::estimate {

namespace {

constexpr double kGradTol = 1e-6;  // times n, on the theta-scale score
constexpr double kStepTol = 1e-9;
constexpr double kBoundaryBand = 1e-6;
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktrack = 60;
constexpr double kLogitCap = 36.0;  // logistic(36) < 1 in double
constexpr double kLogCap = 600.0;

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

Vector5 to_eta(const BivParams& th)
{
    Vector5 e;
    e[kMu1] = std::log(th.m1().mu() / (1.0 - th.m1().mu()));
    e[kMu2] = std::log(th.m2().mu() / (1.0 - th.m2().mu()));
    e[kSigma1] = std::log(th.m1().sigma2());
    e[kSigma2] = std::log(th.m2().sigma2());
    e[kLambda] = th.lam();
    return e;
}

Vector5 clamp_eta(Vector5 e)
{
    for (int j : {kMu1, kMu2}) e[j] = std::clamp(e[j], -kLogitCap, kLogitCap);
    for (int j : {kSigma1, kSigma2}) e[j] = std::clamp(e[j], -kLogCap, kLogCap);
    e[kLambda] = std::clamp(e[kLambda], -1.0, 1.0);
    return e;
}

BivParams to_theta(const Vector5& e)
{
    return BivParams(logistic(e[kMu1]), logistic(e[kMu2]), std::exp(e[kSigma1]), std::exp(e[kSigma2]), e[kLambda]);
}

// Log-likelihood, gradient and Hessian in eta.
struct Local {
    double loglik = bivariate::kRejectedLogLik;
    bool rejected = true;
    Vector5 grad = Vector5::Zero();
    Vector5 score = Vector5::Zero();  // in theta
    Matrix5 hess = Matrix5::Zero();
    Matrix5 info = Matrix5::Zero();  // in theta
};

Local local_at(const Vector5& eta, const Dataset& data, bivariate::Level level)
{
    Local out;
    std::optional<BivParams> parsed;
    try {
        parsed = to_theta(eta);
    } catch (const DomainError&) {
        return out;
    }
    const BivParams& th = *parsed;
    bivariate::Evaluation ev;
    try {
        ev = bivariate::evaluate(th, data, level);
    } catch (const AccuracyError&) {
        return out;
    }
    out.loglik = ev.loglik;
    out.rejected = ev.rejected || !std::isfinite(ev.loglik);
    if (out.rejected || level == bivariate::Level::Value) return out;

    const auto v = th.to_array();
    Vector5 jac, curv;
    for (int j : {kMu1, kMu2}) {
        jac[j] = v[j] * (1.0 - v[j]);
        curv[j] = jac[j] * (1.0 - 2.0 * v[j]);
    }
    for (int j : {kSigma1, kSigma2}) jac[j] = curv[j] = v[j];
    jac[kLambda] = 1.0;
    curv[kLambda] = 0.0;

    out.score = ev.score;
    out.grad = jac.cwiseProduct(ev.score);
    if (level == bivariate::Level::Information) {
        out.info = ev.info;
        out.hess = -(jac.asDiagonal() * ev.info * jac.asDiagonal());
        out.hess.diagonal() += curv.cwiseProduct(ev.score);
    }
    return out;
}

double loglik_at(const Vector5& eta, const Dataset& data)
{
    return local_at(eta, data, bivariate::Level::Value).loglik;
}

// lambda is held on its bound when it sits there and the score points out.
bool lambda_active(const Vector5& eta, const Vector5& grad)
{
    return std::abs(eta[kLambda]) == 1.0 && grad[kLambda] * eta[kLambda] >= 0.0;
}

// Solves (A + tau I) x = b with the smallest tau in a doubling sequence that
// makes the matrix positive definite.
Eigen::VectorXd damped_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b)
{
    const double scale = std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());
    double tau = 0.0;
    for (int k = 0; k < 80; ++k) {
        Eigen::MatrixXd M = A;
        M.diagonal().array() += tau;
        Eigen::LLT<Eigen::MatrixXd> llt(M);
        if (llt.info() == Eigen::Success) return llt.solve(b);
        tau = tau == 0.0 ? 1e-10 * scale : 4.0 * tau;
    }
    return b / scale;
}

struct NewtonState {
    Vector5 eta;
    Local local;
    int iterations = 0;
    bool converged = false;
    bool stalled = false;
    double max_abs_grad = 0.0;
};

void newton(NewtonState& s, const Dataset& data, int max_iter)
{
    const double n = static_cast<double>(data.size());
    s.local = local_at(s.eta, data, bivariate::Level::Information);
    while (s.iterations < max_iter) {
        const bool fixed = lambda_active(s.eta, s.local.grad);
        const int m = fixed ? 4 : 5;
        const Eigen::VectorXd g = s.local.grad.head(m);
        const Eigen::MatrixXd A = -s.local.hess.topLeftCorner(m, m);
        s.max_abs_grad = s.local.score.head(m).cwiseAbs().maxCoeff();

        const Eigen::VectorXd d = damped_solve(A, g);
        // The full step after projection onto the parameter space; a step
        // pushing lambda through its bound does not count as movement.
        Vector5 full = s.eta;
        full.head(m) += d;
        const double moved = (clamp_eta(full) - s.eta).cwiseAbs().maxCoeff();
        if (s.max_abs_grad <= kGradTol * n && moved <= kStepTol) {
            s.converged = true;
            return;
        }

        ++s.iterations;
        double alpha = 1.0;
        bool accepted = false;
        Vector5 next = s.eta;
        for (int k = 0; k < kMaxBacktrack; ++k, alpha *= 0.5) {
            next = s.eta;
            next.head(m) += alpha * d;
            next = clamp_eta(next);
            const double gain = s.local.grad.dot(next - s.eta);
            const double ll = loglik_at(next, data);
            if (ll >= s.local.loglik + kArmijo * gain && ll > bivariate::kRejectedLogLik) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            s.stalled = s.max_abs_grad > kGradTol * n;
            s.converged = !s.stalled;
            return;
        }
        const double before = s.local.loglik;
        s.eta = next;
        s.local = local_at(s.eta, data, bivariate::Level::Information);
        // Steps at the noise level of the CDF quadrature stop changing the
        // log-likelihood before they drop below kStepTol.
        if (s.max_abs_grad <= kGradTol * n &&
            std::abs(s.local.loglik - before) <= 16.0 * std::numeric_limits<double>::epsilon() * std::abs(before)) {
            s.max_abs_grad = s.local.score.head(m).cwiseAbs().maxCoeff();
            s.converged = true;
            return;
        }
    }
    const bool fixed = lambda_active(s.eta, s.local.grad);
    s.max_abs_grad = s.local.score.head(fixed ? 4 : 5).cwiseAbs().maxCoeff();
    s.converged = s.max_abs_grad <= kGradTol * n;
}

// Nelder-Mead on zeta = eta with lambda = tanh(zeta_5).
struct NmContext {
    const Dataset* data;
};

Vector5 zeta_to_eta(const gsl_vector* z)
{
    Vector5 e;
    for (int j = 0; j < 5; ++j) e[j] = gsl_vector_get(z, j);
    e[kLambda] = std::tanh(e[kLambda]);
    return clamp_eta(e);
}

double nm_objective(const gsl_vector* z, void* params)
{
    const auto* ctx = static_cast<const NmContext*>(params);
    const double ll = loglik_at(zeta_to_eta(z), *ctx->data);
    return ll <= bivariate::kRejectedLogLik ? 1e300 : -ll;
}

Vector5 nelder_mead(const Vector5& start, const Dataset& data)
{
    NmContext ctx{&data};
    gsl_multimin_function fn{&nm_objective, 5, &ctx};
    gsl_vector* x = gsl_vector_alloc(5);
    gsl_vector* step = gsl_vector_alloc(5);
    for (int j = 0; j < 5; ++j) {
        double v = start[j];
        if (j == kLambda) v = std::atanh(std::clamp(v, -0.999, 0.999));
        gsl_vector_set(x, j, v);
        gsl_vector_set(step, j, 0.2);
    }
    gsl_multimin_fminimizer* nm = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 5);
    gsl_multimin_fminimizer_set(nm, &fn, x, step);
    // Newton polishes the result, so a loose simplex size suffices.
    for (int it = 0; it < 2000; ++it) {
        if (gsl_multimin_fminimizer_iterate(nm) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(nm), 1e-4) == GSL_SUCCESS) break;
    }
    const Vector5 out = zeta_to_eta(gsl_multimin_fminimizer_x(nm));
    gsl_multimin_fminimizer_free(nm);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return out;
}

void require_fit_data(const Dataset& data)
{
    if (data.size() < 5) {
        throw EstimationError("at least 5 observations are needed, got " + std::to_string(data.size()));
    }
    for (int m : {1, 2}) {
        const auto col = m == 1 ? data.column1() : data.column2();
        const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        if (*lo == *hi) throw EstimationError("column y" + std::to_string(m) + " is constant");
    }
}

std::vector<double> average_ranks(const std::vector<double>& x)
{
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&x](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j);
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size() || a.size() < 2) detail::domain_fail("spearman", "need two equal-length samples");
    const auto ra = average_ranks(a), rb = average_ranks(b);
    const double mean = 0.5 * static_cast<double>(a.size() - 1);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (ra[i] - mean) * (rb[i] - mean);
        saa += (ra[i] - mean) * (ra[i] - mean);
        sbb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (saa == 0.0 || sbb == 0.0) detail::domain_fail("spearman", "constant sample");
    return sab / std::sqrt(saa * sbb);
}

BivParams moment_init(const Dataset& data)
{
    require_fit_data(data);
    const auto c1 = data.column1(), c2 = data.column2();
    const double n = static_cast<double>(data.size());
    // Sums run over sorted copies so the result does not depend on row order.
    auto margin = [n](std::vector<double> y) {
        std::sort(y.begin(), y.end());
        const double mu = std::accumulate(y.begin(), y.end(), 0.0) / n;
        double dev = 0.0;
        for (double v : y) dev += simplex::unit_deviance(v, mu);
        return UniParams(mu, dev / n);
    };
    const double lam = std::clamp(3.0 * spearman(c1, c2), -0.95, 0.95);
    return BivParams(margin(c1), margin(c2), Lambda(lam));
}

std::pair<double, double> wald_ci(double est, double se, double level)
{
    if (!(level > 0.0 && level < 1.0)) detail::domain_fail("wald_ci", "level must lie in (0, 1)");
    if (!(se >= 0.0)) detail::domain_fail("wald_ci", "standard error must be non-negative");
    const double z = boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + level));
    return {est - z * se, est + z * se};
}

FitResult fit(const Dataset& data, const FitOptions& options)
{
    require_fit_data(data);
    if (!(options.level > 0.0 && options.level < 1.0)) detail::domain_fail("fit", "level must lie in (0, 1)");
    if (options.max_iter < 1) detail::domain_fail("fit", "max_iter must be positive");

    NewtonState s;
    s.eta = to_eta(options.init ? *options.init : moment_init(data));
    // Pull lambda toward independence until every copula factor is positive.
    for (int k = 0; k < 60 && loglik_at(s.eta, data) <= bivariate::kRejectedLogLik; ++k) s.eta[kLambda] *= 0.5;

    newton(s, data, options.max_iter);
    bool fallback = false;
    if (!s.converged) {
        fallback = true;
        NewtonState t;
        t.eta = nelder_mead(s.eta, data);
        t.iterations = s.iterations;
        newton(t, data, options.max_iter + s.iterations);
        if (t.converged || t.local.loglik > s.local.loglik) s = t;
    }

    FitResult r;
    r.estimates = to_theta(s.eta);
    r.n = data.size();
    r.level = options.level;
    r.loglik = s.local.loglik;
    r.converged = s.converged;
    r.iterations = s.iterations;
    r.max_abs_score = s.max_abs_grad;
    r.lambda_at_boundary = std::abs(s.eta[kLambda]) >= 1.0 - kBoundaryBand;
    try {
        r.e_xy = bivariate::joint_moment(r.estimates);
    } catch (const AccuracyError&) {
        r.e_xy = std::numeric_limits<double>::quiet_NaN();
    }

    const Eigen::SelfAdjointEigenSolver<Matrix5> eig(s.local.info);
    const bool invertible = eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 0.0;
    const auto est = r.estimates.to_array();
    if (invertible) r.vcov = s.local.info.inverse();
    for (std::size_t j = 0; j < kNumParams; ++j) {
        const double var = invertible ? r.vcov(j, j) : std::numeric_limits<double>::quiet_NaN();
        r.se_reliable[j] = invertible && var > 0.0;
        r.std_errors[j] = r.se_reliable[j] ? std::sqrt(var) : std::numeric_limits<double>::quiet_NaN();
        if (r.se_reliable[j]) {
            r.ci[j] = wald_ci(est[j], r.std_errors[j], options.level);
        } else {
            r.ci[j] = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
        }
    }
    if (r.se_reliable[kLambda]) {
        r.ci[kLambda].first = std::max(r.ci[kLambda].first, -1.0);
        r.ci[kLambda].second = std::min(r.ci[kLambda].second, 1.0);
    }
    if (r.lambda_at_boundary) r.se_reliable[kLambda] = false;

    if (!r.converged) {
        r.message = "no convergence after " + std::to_string(r.iterations) + " iterations (max |score| " +
                    std::to_string(r.max_abs_score) + ")";
    } else if (fallback) {
        r.message = "converged after Nelder-Mead restart";
    } else {
        r.message = "converged";
    }
    if (!invertible) r.message += "; observed information is not positive definite";
    return r;
}

}  // namespace bsimplex::estimate
