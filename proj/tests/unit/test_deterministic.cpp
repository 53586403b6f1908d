#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hjblab/deterministic.hpp"
#include "oracles.hpp"

using namespace hjb;

namespace {

EigenSpectrum power(double a) { return make_spectrum(PowerLawSpec{a}).value(); }

}  // namespace

TEST_CASE("Lax-Oleinik descent matches the quadratic closed form") {
    const auto s = power(2.0);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> mu(0.1, 3.0), coord(-2.0, 2.0);
    for (std::size_t N : {4u, 16u, 64u}) {
        std::vector<double> m(N), x(N);
        for (std::size_t i = 0; i < N; ++i) {
            m[i] = mu(rng);
            x[i] = coord(rng);
        }
        const InitialCondition phi0 = DiagonalQuadratic{make_quadratic_data(ListRule{m}).value()};
        const double t = 0.7;
        auto r = lax_oleinik_solve(phi0, s, t, TruncatedPoint(x));
        REQUIRE(r);
        CHECK(r->converged);
        // Independent: per-coordinate minimization of m y^2 / 2 + (x - y)^2 / (2 t lambda).
        double psi = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double l = s.eigenvalue(i);
            double y = 0.0;
            psi += oracle::golden_min([&](double v) { return 0.5 * m[i] * v * v + (x[i] - v) * (x[i] - v) / (2.0 * t * l); },
                                      -5.0, 5.0, &y);
            CHECK(r->minimizer[i] == doctest::Approx(y).epsilon(1e-5).scale(1.0));
        }
        CHECK(std::fabs(r->psi - psi) <= 1e-9 * (1.0 + psi));
    }
}

TEST_CASE("one-dimensional Lax-Oleinik against golden section") {
    for (auto p : {Profile1D::smooth_abs(0.2), Profile1D::log_cosh(1.5), Profile1D::quadratic(0.5)}) {
        for (double x : {-1.7, 0.0, 0.4, 2.5}) {
            auto r = lax_oleinik_1d(p, 4.0, 0.3, x);
            REQUIRE(r);
            const double ref = oracle::golden_min(
                [&](double y) { return p.value(y) + (x - y) * (x - y) / (2.0 * 0.3 * 4.0); }, -10.0, 10.0);
            CHECK(r->psi == doctest::Approx(ref).epsilon(1e-10));
        }
    }
}

TEST_CASE("deterministic bounds hold along t") {
    const auto s = power(2.0);
    const InitialCondition phi0 = Separable{{Profile1D::smooth_abs(0.2), Profile1D::log_cosh(2.0)}};
    const TruncatedPoint x{1.3, -0.8};
    for (double t : {0.1, 0.5}) {
        auto a = lax_oleinik_solve(phi0, s, t, x);
        auto b = lax_oleinik_solve(phi0, s, 2.0 * t, x);
        REQUIRE(a);
        REQUIRE(b);
        auto rep = deterministic_bounds_check(*a, *b, phi0, s, t, 2.0 * t, x, 1e-9);
        REQUIRE(rep);
        CHECK(rep->passed);
        CHECK(rep->monotonicity_margin >= -1e-9);
        CHECK(rep->upper_bound_margin >= -1e-9);
    }
}

TEST_CASE("nonconvex data is rejected by the descent solver") {
    const auto s = power(2.0);
    GenericConvex g;
    g.value = [](std::span<const double> y) { return nonconvex_profile_value(y); };
    g.gradient = [](std::span<const double> y, std::span<double> out) {
        double r2 = 0.0;
        for (double v : y) r2 += v * v;
        for (std::size_t i = 0; i < y.size(); ++i) out[i] = (r2 >= 1.0 ? 2.0 : -2.0) * y[i];
    };
    g.convex = false;
    auto r = lax_oleinik_solve(InitialCondition{g}, s, 1.0, TruncatedPoint{0.0, 0.0});
    REQUIRE(!r);
    CHECK(r.error().code == ErrorCode::NonConvex);
}

TEST_CASE("counterexamples") {
    const auto s = power(2.0);
    auto v = counterexample_nonconvex(s, 1.0, 200);
    REQUIRE(v);
    // Independent: min over n of 1 + 1/(2 (n+1)^2), attained at the last probe.
    CHECK(*v == doctest::Approx(1.0 + 1.0 / (2.0 * 201.0 * 201.0)).epsilon(1e-15));
    CHECK(*v >= 1.0);

    CHECK(!counterexample_growth(2.0, 1.0, 0.1, TruncatedPoint{1.0}, 4));
    // Finite x: only the competitor's correction term survives.
    const TruncatedPoint x{1.0, 0.5, 0.25};
    auto j = counterexample_growth(3.0, 1.0, 0.5, x, 3);
    REQUIRE(j);
    double inner = 0.0;
    for (std::size_t k = 0; k < 3; ++k) inner += x[k] / (k + 1.0);
    const double zN = -inner * 4.0;
    CHECK(*j == doctest::Approx(zN * zN / 64.0 / (2.0 * 0.5)));
}

TEST_CASE("descent solver on coupled quadratic data") {
    // phi0(y) = 1/2 |y|^2 + 1/2 a (y0 + y1)^2 is not diagonal, so the
    // preconditioner is inexact and the iteration does real work.
    const auto s = power(2.0);
    const double a = 3.0, t = 0.4;
    GenericConvex g;
    g.value = [a](std::span<const double> y) {
        double v = 0.0;
        for (double c : y) v += 0.5 * c * c;
        return v + 0.5 * a * (y[0] + y[1]) * (y[0] + y[1]);
    };
    g.gradient = [a](std::span<const double> y, std::span<double> out) {
        for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i];
        out[0] += a * (y[0] + y[1]);
        out[1] += a * (y[0] + y[1]);
    };
    g.lipschitz_gradient = 1.0 + 2.0 * a;
    const TruncatedPoint x{1.0, -0.3, 0.8};
    auto r = lax_oleinik_solve(InitialCondition{g}, s, t, x);
    REQUIRE(r);
    CHECK(r->converged);
    CHECK(r->iterations > 1);
    // Optimality: (I + a 11^T) y + D^-1 (y - x) = 0 with D = t lambda, solved by Cramer's rule.
    const double d0 = 1.0 / (t * 1.0), d1 = 1.0 / (t * 4.0), d2 = 1.0 / (t * 9.0);
    const double m00 = 1.0 + a + d0, m01 = a, m11 = 1.0 + a + d1;
    const double det = m00 * m11 - m01 * m01;
    const double y0 = (d0 * x[0] * m11 - m01 * d1 * x[1]) / det;
    const double y1 = (m00 * d1 * x[1] - m01 * d0 * x[0]) / det;
    const double y2 = d2 * x[2] / (1.0 + d2);
    CHECK(r->minimizer[0] == doctest::Approx(y0).epsilon(1e-6));
    CHECK(r->minimizer[1] == doctest::Approx(y1).epsilon(1e-6));
    CHECK(r->minimizer[2] == doctest::Approx(y2).epsilon(1e-6));
    const std::vector<double> y{y0, y1, y2};
    double psi = g.value(y);
    for (std::size_t i = 0; i < 3; ++i) psi += (x[i] - y[i]) * (x[i] - y[i]) / (2.0 * t * s.eigenvalue(i));
    CHECK(r->psi == doctest::Approx(psi).epsilon(1e-10));
}
