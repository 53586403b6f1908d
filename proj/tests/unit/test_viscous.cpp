#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include "hjblab/cole_hopf.hpp"
#include "hjblab/field.hpp"
#include "hjblab/grid.hpp"
#include "hjblab/verify.hpp"
#include "oracles.hpp"

using namespace hjb;

namespace {

EigenSpectrum power(double a) { return make_spectrum(PowerLawSpec{a}).value(); }

}  // namespace

TEST_CASE("Cole-Hopf quadrature against Simpson in long double") {
    for (auto p : {Profile1D::quadratic(1.0), Profile1D::smooth_abs(0.2), Profile1D::log_cosh(1.5)}) {
        for (double lambda : {1.0, 4.0}) {
            for (double t : {0.1, 1.0}) {
                for (double x : {-1.5, 0.0, 0.7}) {
                    auto pt = cole_hopf_point(p, lambda, t, x);
                    REQUIRE(pt);
                    const auto f = [&p](double y) { return p.value(y); };
                    CHECK(pt->value == doctest::Approx(oracle::cole_hopf(f, lambda, t, x)).epsilon(1e-10));
                    const double h = 1e-4;
                    const double up = oracle::cole_hopf(f, lambda, t, x + h);
                    const double dn = oracle::cole_hopf(f, lambda, t, x - h);
                    CHECK(pt->dx == doctest::Approx((up - dn) / (2.0 * h)).epsilon(1e-6));
                    // The viscous value dominates the deterministic one.
                    CHECK(pt->value >= pt->psi - 1e-12);
                    // u_t = u_xx - lambda/2 u_x^2 at the quadrature point.
                    CHECK(pt->dt == doctest::Approx(pt->dxx - 0.5 * lambda * pt->dx * pt->dx).epsilon(1e-8).scale(1.0));
                }
            }
        }
    }
}

TEST_CASE("Cole-Hopf reproduces the quadratic closed form") {
    const auto p = Profile1D::quadratic(2.0);
    for (double t : {0.05, 0.5, 3.0}) {
        auto v = cole_hopf_1d(p, 9.0, t, 0.8);
        REQUIRE(v);
        const double mu = 2.0 / (1.0 + 18.0 * t);
        CHECK(*v == doctest::Approx(std::log1p(18.0 * t) / 9.0 + 0.5 * mu * 0.64).epsilon(1e-12));
    }
}

TEST_CASE("solution field queries agree across representations") {
    const auto s = power(2.0);
    const auto qd = make_quadratic_data(ListRule{{1.0, 0.5}}).value();
    const SolutionField closed(ClosedFormQuadratic{make_quadratic_solution(s, qd, 1).value()});
    const SolutionField tens(SeparableOracle{{Profile1D::quadratic(1.0), Profile1D::quadratic(0.5)}, s, {}});
    const TruncatedPoint x{0.4, -1.1};
    for (double t : {0.2, 0.9}) {
        CHECK(closed.value(t, x).value() == doctest::Approx(tens.value(t, x).value()).epsilon(1e-11));
        CHECK(closed.time_derivative(t, x).value() == doctest::Approx(tens.time_derivative(t, x).value()).epsilon(1e-8));
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(closed.hessian_entry(t, x, i, i).value() ==
                  doctest::Approx(tens.hessian_entry(t, x, i, i).value()).epsilon(1e-8));
        }
        CHECK(std::fabs(tens.hessian_entry(t, x, 0, 1).value()) <= 1e-12);
    }
}

TEST_CASE("grid solver: convexity, shift invariance, binary round trip") {
    const auto s = power(2.0);
    const InitialCondition phi0 = Separable{{Profile1D::smooth_abs(0.2)}};
    const InitialCondition shifted = Separable{{Profile1D::smooth_abs(0.2).shifted(0.1)}};
    auto spec = make_grid_spec({5.0}, 0.02, 0.5, {0.1, 0.25});
    auto a = solve_fd(phi0, s, 1, spec);
    auto b = solve_fd(shifted, s, 1, spec);
    REQUIRE(a);
    REQUIRE(b);
    const double h = spec.spacing(0);
    for (std::size_t k = 0; k < a->times().size(); ++k) {
        const auto& u = a->slice(k);
        const auto& v = b->slice(k);
        REQUIRE(u.size() == v.size());
        double worst = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) worst = std::max(worst, std::fabs(v[j] - u[j] - 0.1));
        CHECK(worst <= 1e-12);
        // Convexity holds away from the boundary layer, where the data is psi.
        for (std::size_t j = 1; j + 1 < u.size(); ++j) {
            if (std::fabs(a->coordinate(0, j)) > spec.half_width[0] - 1.0) continue;
            CHECK(u[j + 1] - 2.0 * u[j] + u[j - 1] >= -h * h * 1e-6);
        }
    }

    std::stringstream io;
    REQUIRE(a->write_binary(io));
    const std::string bytes = io.str();
    CHECK(bytes.substr(0, 8) == "HJBF0001");
    auto back = GridField::read_binary(io);
    REQUIRE(back);
    CHECK(back->times() == a->times());
    for (std::size_t k = 0; k < a->times().size(); ++k) CHECK(back->slice(k) == a->slice(k));

    auto err = grid_oracle_error(*a, phi0, 0.1, 2.0);
    REQUIRE(err);
    CHECK(err->sup_error <= 1e-2);
    CHECK(err->evaluated > 0);
}

TEST_CASE("grid solver rejects a boundary too close to the minimum") {
    const auto s = power(2.0);
    auto spec = make_grid_spec({1.0}, 0.05, 0.2, {});
    spec.boundary_margin = 5.0;
    auto g = solve_fd(Separable{{Profile1D::quadratic(1.0)}}, s, 1, spec);
    REQUIRE(!g);
    CHECK(g.error().code == ErrorCode::BoundaryMargin);
}
