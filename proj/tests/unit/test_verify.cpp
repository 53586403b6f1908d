#include <doctest.h>

#include <cmath>
#include <vector>

#include "hjblab/convergence.hpp"
#include "hjblab/verify.hpp"
#include "nlohmann/json.hpp"

using namespace hjb;

namespace {

EigenSpectrum power(double a) { return make_spectrum(PowerLawSpec{a}).value(); }

SampleSet samples(std::size_t dim, std::size_t count, std::uint64_t seed, double t_min = 0.1, double t_max = 1.0) {
    SampleSpec s;
    s.dim = dim;
    s.count = count;
    s.seed = seed;
    s.t_min = t_min;
    s.t_max = t_max;
    return make_samples(s).value();
}

}  // namespace

TEST_CASE("samples are deterministic and inside the box") {
    const auto a = samples(3, 50, 9);
    const auto b = samples(3, 50, 9);
    REQUIRE(a.points.size() == 50);
    for (std::size_t k = 0; k < 50; ++k) {
        CHECK(a.points[k].t == b.points[k].t);
        CHECK(a.points[k].x.coords == b.points[k].x.coords);
        CHECK(a.points[k].t >= 0.1);
        CHECK(a.points[k].t <= 1.0);
        for (double v : a.points[k].x.coords) CHECK(std::fabs(v) <= 2.0);
    }
    CHECK(radical_inverse(0, 1) == 0.5);
    CHECK(radical_inverse(1, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(radical_inverse(0, 6) == 0.375);
}

TEST_CASE("epsilon tail against direct summation") {
    const auto s = power(2.0);
    for (std::size_t d : {5u, 10u, 20u}) {
        auto e = epsilon_tail(s, d);
        REQUIRE(e);
        // sum_{i >= d} (i+1)^-2 = pi^2/6 - sum_{m <= d} m^-2.
        long double head = 0.0L;
        for (std::size_t m = 1; m <= d; ++m) head += 1.0L / (static_cast<long double>(m) * m);
        const double ref = static_cast<double>(3.14159265358979323846L * 3.14159265358979323846L / 6.0L - head);
        CHECK(*e == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("estimate suite on a closed-form field") {
    const auto s = power(2.0);
    const auto data = make_quadratic_data(ConstantRule{1.0}).value();
    const SolutionField field(ClosedFormQuadratic{make_quadratic_solution(s, data).value()});
    const InitialCondition phi0 = DiagonalQuadratic{data};
    const auto set = samples(6, 40, 4, 0.05, 2.0);
    const auto curv = ic_curvature_bounds(phi0, 6);

    auto decay = check_second_derivative_decay(field, curv, set, 1e-10);
    REQUIRE(decay);
    CHECK(decay->passed);
    // phi_ii equals the bound exactly for quadratic data.
    CHECK(std::fabs(decay->worst_margin) <= 1e-12);

    const std::vector<std::vector<double>> dirs{{1, 0, 0, 0, 0, 0}, {0.6, 0.8, 0, 0, 0, 0}, {0.5, 0.5, 0.5, 0.5, 0, 0}};
    auto hess = check_hessian_metric_bound(field, set, dirs, curv, 1e-10);
    REQUIRE(hess);
    CHECK(hess->passed);

    auto grad = check_gradient_bounds(field, ic_infimum(phi0), set, 1e-10);
    REQUIRE(grad);
    CHECK(grad->passed);

    const Modulus mod{s, 1.0, std::nullopt};
    auto sw = check_sandwich(field, phi0, s, mod, set, 1e-8);
    REQUIRE(sw);
    CHECK(sw->passed);
    REQUIRE(sw->metric("upper_margin_max"));
    CHECK(*sw->metric("upper_margin_max") <= 1e-6);

    auto json = nlohmann::json::parse(report_to_json(*sw));
    CHECK(json["name"] == "sandwich");
    CHECK(json["passed"] == true);
}

TEST_CASE("a violated bound is reported, not hidden") {
    const auto s = power(2.0);
    const auto data = make_quadratic_data(ConstantRule{2.0}).value();
    const SolutionField field(ClosedFormQuadratic{make_quadratic_solution(s, data).value()});
    // Claiming phi0_ii <= 1 when it is 2 must fail the decay check.
    const std::vector<std::optional<double>> wrong(4, 1.0);
    auto rep = check_second_derivative_decay(field, wrong, samples(4, 10, 1), 1e-10);
    REQUIRE(rep);
    CHECK(!rep->passed);
    CHECK(rep->worst_margin < 0.0);
}

TEST_CASE("transformed residual of the closed form sits inside its band") {
    const auto s = power(2.0);
    const auto data = make_quadratic_data(ConstantRule{1.0}).value();
    const SolutionField field(ClosedFormQuadratic{make_quadratic_solution(s, data, 50).value()});
    const auto set = samples(51, 30, 8);
    for (std::size_t d : {5u, 20u}) {
        auto r = transformed_residual(field, s, d, set, 1e-10);
        REQUIRE(r);
        CHECK(r->passed);
        CHECK(r->min >= -1e-10);
        CHECK(r->max <= r->epsilon_d / 0.1 + 1e-10);
    }
}

TEST_CASE("comparison gap of a constant shift") {
    const auto s = power(2.0);
    const SolutionField a(SeparableOracle{{Profile1D::smooth_abs(0.3)}, s, {}});
    const SolutionField b(SeparableOracle{{Profile1D::smooth_abs(0.3).shifted(0.1)}, s, {}});
    const std::vector<TruncatedPoint> pts{TruncatedPoint{-1.0}, TruncatedPoint{0.0}, TruncatedPoint{1.5}};
    auto g = comparison_gap(a, b, 0.2, 1.0, {0.2, 0.5, 1.0}, pts, 1e-12);
    REQUIRE(g);
    CHECK(g->passed);
    CHECK(g->sup_gap == doctest::Approx(0.1).epsilon(1e-11));
    auto self = comparison_gap(a, a, 0.2, 1.0, {0.2, 1.0}, pts, 0.0);
    REQUIRE(self);
    CHECK(self->sup_gap == 0.0);
}

TEST_CASE("Galerkin levels against direct summation") {
    const auto s = power(2.0);
    const auto data = make_quadratic_data(ConstantRule{1.0}).value();
    auto table = galerkin_convergence(s, data, {4, 8, 16}, 1.0, InversePowerPoint{1.0, 1.0}, 1e-8);
    REQUIRE(table);
    CHECK(table->passed);
    for (const auto& row : table->rows) {
        long double v = 0.0L;
        for (std::size_t i = 0; i <= row.level; ++i) {
            const long double l = (i + 1.0L) * (i + 1.0L), x = 1.0L / (i + 1.0L);
            v += std::log1p(static_cast<double>(l)) / l + 0.5L / (1.0L + l) * x * x;
        }
        CHECK(row.value == doctest::Approx(static_cast<double>(v)).epsilon(1e-13));
        CHECK(row.cauchy_gap <= row.tail_bound + 1e-8);
    }
    CHECK(!galerkin_convergence(s, data, {8, 4}, 1.0, InversePowerPoint{}, 1e-8));
}
