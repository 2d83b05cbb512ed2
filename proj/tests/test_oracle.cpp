#include <doctest.h>

#include <cmath>

#include "bsimplex/errors.hpp"
#include "bsimplex/oracle.hpp"
#include "bsimplex/specfun.hpp"

using namespace bsimplex;

namespace {

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

Matrix5 coefficient_matrix()
{
    Matrix5 A;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) A(i, j) = 1.0 / (1.0 + i + j) + (i == j ? 2.0 : 0.0);
    return A;
}

}  // namespace

TEST_CASE("finite differences of a quadratic")
{
    const Matrix5 A = coefficient_matrix();
    Vector5 b;
    b << 1.0, -2.0, 0.5, 3.0, -0.25;
    auto f = [&](const Vector5& x) { return 0.5 * x.dot(A * x) + b.dot(x); };
    Vector5 x;
    x << 0.3, -1.5, 2.0, 0.01, 7.0;
    const Vector5 g = oracle::numeric_gradient(f, x);
    CHECK((g - (A * x + b)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((oracle::numeric_hessian(f, x) - A).cwiseAbs().maxCoeff() < 1e-6);
    CHECK_THROWS_AS(oracle::numeric_gradient(f, x, 0.0), DomainError);
    CHECK_THROWS_AS(oracle::numeric_hessian(f, x, -1.0), DomainError);
    auto bad = [](const Vector5& v) { return v[0] > 0.3 ? NAN : 0.0; };
    CHECK_THROWS_AS(oracle::numeric_hessian(bad, x), DomainError);
}

TEST_CASE("J integrals against extended-precision values")
{
    CHECK(rel(oracle::numeric_j0(0.5), 0.9061501530665792) < 1e-12);
    CHECK(rel(oracle::numeric_j0(1.0), 0.15485237913594307) < 1e-12);
    CHECK(rel(oracle::numeric_j0(2.0), 0.009729223619761971) < 1e-12);
    CHECK(rel(oracle::numeric_j0(5.0), 8.832922182541692e-06) < 1e-12);
    CHECK(rel(oracle::numeric_j1(2.0), 0.007192534572331352) < 1e-12);
    CHECK_THROWS_AS(oracle::numeric_j0(0.0), DomainError);
}

TEST_CASE("oracle CDF agrees with the library CDF")
{
    for (double mu : {0.1, 0.5, 0.9}) {
        for (double s : {0.5, 2.0, 5.0}) {
            const UniParams p(mu, s);
            CHECK(std::abs(oracle::marginal_mass(p) - 1.0) < 1e-10);
            for (double y : {0.01, 0.3, 0.5, 0.77, 0.995}) {
                CAPTURE(mu);
                CAPTURE(s);
                CAPTURE(y);
                CHECK(std::abs(oracle::marginal_cdf(y, p) - simplex::cdf(y, p)) < 1e-10);
            }
        }
    }
}

TEST_CASE("normalization scan")
{
    const UniParams a(0.3, 0.5), b(0.9, 5.0);
    const double z = oracle::normalization_scan({a, b, Lambda(0.0)});
    CHECK(rel(z, oracle::marginal_mass(a) * oracle::marginal_mass(b)) < 1e-14);
    CHECK(std::abs(oracle::normalization_scan({a, b, Lambda(-1.0)}) - 1.0) < 1e-6);
    CHECK_THROWS_AS(BivParams(0.5, 1.5, 2.0, 2.0, 0.0), DomainError);
}

TEST_CASE("joint moment quadrature converges under refinement")
{
    for (const BivParams th : {BivParams(0.3, 0.3, 0.5, 0.5, 1.0), BivParams(0.5, 0.5, 5.0, 5.0, -1.0),
                               BivParams(0.9, 0.9, 2.0, 2.0, 1.0)}) {
        const double tol = 1e-8;
        const double coarse = oracle::numeric_joint_moment(th, tol);
        const double fine = oracle::numeric_joint_moment(th, tol / 2.0);
        CHECK(std::abs(coarse - fine) < tol);
    }
    CHECK(std::abs(oracle::numeric_joint_moment({0.5, 0.5, 2.0, 2.0, 0.0}) - 0.25) < 1e-6);
    CHECK_THROWS_AS(oracle::numeric_joint_moment({0.5, 0.5, 2.0, 2.0, 0.0}, 0.0), DomainError);
}

TEST_CASE("battery passes and notices a broken Struve function")
{
    const auto clean = oracle::battery();
    for (const auto& r : clean) {
        CAPTURE(r.name);
        CHECK(r.pass);
    }
    specfun::testing::ScopedStruvePerturbation broken(1e-3);
    int failures = 0;
    for (const auto& r : oracle::battery()) failures += r.pass ? 0 : 1;
    CHECK(failures >= 3);
}
