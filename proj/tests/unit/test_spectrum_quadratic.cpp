#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hjblab/exact_sum.hpp"
#include "hjblab/quadratic.hpp"
#include "hjblab/spectrum.hpp"
#include "oracles.hpp"

using namespace hjb;

TEST_CASE("power-law spectrum and operator actions") {
    auto s = make_spectrum(PowerLawSpec{2.0});
    REQUIRE(s);
    CHECK(!s->capacity());
    for (std::size_t i = 0; i < 20; ++i) CHECK(s->eigenvalue(i) == doctest::Approx((i + 1.0) * (i + 1.0)));

    TruncatedPoint x{1.0, 2.0, 3.0};
    auto ax = apply_operator(*s, OperatorKind::A, x);
    auto ainv = apply_operator(*s, OperatorKind::AInverse, x);
    auto b = apply_operator(*s, OperatorKind::B, x);
    REQUIRE(ax);
    REQUIRE(ainv);
    REQUIRE(b);
    CHECK((*ax)[2] == doctest::Approx(27.0));
    CHECK((*ainv)[1] == doctest::Approx(0.5));
    CHECK((*b)[2] == doctest::Approx(1.0));
    CHECK(inverse_metric(*s, x.coords) == doctest::Approx(1.0 + 1.0 + 1.0));
    CHECK(forward_metric(*s, x.coords) == doctest::Approx(1.0 + 16.0 + 81.0));
}

TEST_CASE("spectrum validation rejects bad descriptors") {
    CHECK(!make_spectrum(PowerLawSpec{1.0}));
    CHECK(!make_spectrum(PowerLawSpec{0.5}));
    CHECK(!make_spectrum(CircleSpec{1}));
    CHECK(!make_spectrum(ExplicitSpec{{}}));
    CHECK(!make_spectrum(ExplicitSpec{{1.0, -2.0}}));
    CHECK(!make_spectrum(ExplicitSpec{{3.0, 2.0}}));
    CHECK(make_spectrum(ExplicitSpec{{1.0, 1.0, 2.0}}));
}

TEST_CASE("circle spectrum matches the discrete operator") {
    for (std::size_t N : {2u, 3u, 4u, 7u, 8u}) {
        auto s = make_spectrum(CircleSpec{N});
        REQUIRE(s);
        REQUIRE(s->capacity() == N);
        // Eigenvalues of I - N^2 Delta on the cycle, from the symbol.
        std::vector<double> expect;
        for (std::size_t k = 0; k < N; ++k) {
            const double sn = std::sin(M_PI * static_cast<double>(k) / static_cast<double>(N));
            expect.push_back(1.0 + 4.0 * static_cast<double>(N * N) * sn * sn);
        }
        std::sort(expect.begin(), expect.end());
        for (std::size_t i = 0; i < N; ++i) CHECK(s->eigenvalue(i) == doctest::Approx(expect[i]).epsilon(1e-13));
        CHECK(s->eigenvalue(0) == 1.0);
    }
}

TEST_CASE("summability of log(1+lambda)/lambda") {
    auto s = make_spectrum(PowerLawSpec{2.0});
    REQUIRE(s);
    auto r = summability_report(*s, 1000);
    REQUIRE(r);
    CHECK(r->converges);
    CHECK(r->tail_kind == TailKind::IntegralBound);
    long double direct = 0.0L;
    for (std::size_t i = 0; i < 1000; ++i) {
        const long double l = (i + 1.0L) * (i + 1.0L);
        direct += std::log1p(static_cast<double>(l)) / l;
    }
    CHECK(r->partial_sum == doctest::Approx(static_cast<double>(direct)).epsilon(1e-13));
    // The true remainder lies below the majorant.
    long double more = 0.0L;
    for (std::size_t i = 1000; i < 200000; ++i) {
        const long double l = (i + 1.0L) * (i + 1.0L);
        more += std::log1p(static_cast<double>(l)) / l;
    }
    CHECK(static_cast<double>(more) <= r->tail_bound);

    auto c = make_spectrum(CircleSpec{6});
    REQUIRE(c);
    auto rc = summability_report(*c, 1000);
    REQUIRE(rc);
    CHECK(rc->terms_used == 6);
    CHECK(rc->tail_bound == 0.0);
}

TEST_CASE("Riccati closed form against long double RK4") {
    for (double lambda : {1.0, 4.0, 9.0, 100.0}) {
        for (double mu0 : {0.0, 0.5, 1.0, 5.0}) {
            for (double t : {0.01, 0.1, 1.0, 10.0}) {
                auto mu = riccati_mu(mu0, lambda, t);
                REQUIRE(mu);
                CHECK(*mu == doctest::Approx(static_cast<double>(oracle::riccati(mu0, lambda, t))).epsilon(1e-14));
                auto c = riccati_ode_crosscheck(mu0, lambda, t, 10000);
                REQUIRE(c);
                const double ref = static_cast<double>(oracle::riccati_rk4(mu0, lambda, t, 10000));
                CHECK(std::fabs(c->integrated - ref) <= 1e-12 * (1.0 + std::fabs(ref)));
            }
        }
    }
}

TEST_CASE("blow-up time is exact and evaluation past it fails") {
    auto t = blowup_time(-1.0, 2.0);
    REQUIRE(t);
    CHECK(*t == 0.5);
    CHECK(!blowup_time(0.0, 2.0));
    CHECK(!blowup_time(1.0, 2.0));
    CHECK(riccati_mu(-1.0, 2.0, 0.49));
    auto at = riccati_mu(-1.0, 2.0, 0.5);
    REQUIRE(!at);
    CHECK(at.error().code == ErrorCode::BlowUp);
    REQUIRE(at.error().blowup_time);
    CHECK(*at.error().blowup_time == 0.5);
    CHECK(!riccati_mu(-1.0, 2.0, 3.0));
}

TEST_CASE("quadratic solution matches direct summation") {
    auto s = make_spectrum(ExplicitSpec{{1.0, 3.0, 7.0, 20.0}});
    REQUIRE(s);
    const std::vector<double> mu0{0.5, 2.0, 0.0, 1.5};
    auto data = make_quadratic_data(ListRule{mu0});
    REQUIRE(data);
    auto sol = make_quadratic_solution(*s, *data);
    REQUIRE(sol);
    const std::vector<double> lam{1.0, 3.0, 7.0, 20.0};
    for (double t : {0.05, 0.3, 2.0}) {
        const std::vector<double> x{0.3, -1.2, 2.0, 0.7};
        auto v = eval_quadratic(*sol, t, TruncatedPoint(x), EvalMode::Value);
        REQUIRE(v);
        CHECK(std::get<double>(*v) ==
              doctest::Approx(static_cast<double>(oracle::quadratic_value(lam, mu0, t, x))).epsilon(1e-13));
        auto g = eval_quadratic(*sol, t, TruncatedPoint(x), EvalMode::Gradient);
        REQUIRE(g);
        const auto& gv = std::get<std::vector<double>>(*g);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(gv[i] == doctest::Approx(static_cast<double>(oracle::riccati(mu0[i], lam[i], t)) * x[i]));
        }
        // Time derivative against a centred difference of the direct sum.
        const double h = 1e-5;
        const double fd = static_cast<double>((oracle::quadratic_value(lam, mu0, t + h, x) -
                                               oracle::quadratic_value(lam, mu0, t - h, x)) /
                                              (2.0L * h));
        auto dt = quadratic_time_derivative(*sol, t, TruncatedPoint(x));
        REQUIRE(dt);
        CHECK(*dt == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("c(t) certification brackets the infinite series") {
    auto s = make_spectrum(PowerLawSpec{2.0});
    auto data = make_quadratic_data(ConstantRule{1.0});
    REQUIRE(s);
    REQUIRE(data);
    auto sol = make_quadratic_solution(*s, *data);
    REQUIRE(sol);
    auto c = c_of_t(*sol, 1.0, 1e-10);
    REQUIRE(c);
    CHECK(c->error_bound <= 1e-10);
    // Independent: 2e6 terms plus the integral of the tail majorant
    // log(1+x^2 t)/x^2 <= (log(t) + 2 log x + 1/(t x^2)) / x^2.
    long double head = 0.0L;
    const std::size_t M = 2000000;
    for (std::size_t i = M; i-- > 0;) {
        const long double l = (i + 1.0L) * (i + 1.0L);
        head += std::log1p(static_cast<double>(l)) / l;
    }
    const double m = static_cast<double>(M) + 0.5;
    const double tail = (2.0 * std::log(m) + 2.0) / m;
    CHECK(std::fabs(c->value - static_cast<double>(head) - 0.5 * tail) <= 0.5 * tail + 1e-9);
}

TEST_CASE("ExactSum is order independent and exact") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v;
    for (int i = 0; i < 1000; ++i) {
        const double a = u(rng) * std::pow(10.0, static_cast<int>(rng() % 30) - 15);
        v.push_back(a);
        v.push_back(-a);
    }
    v.push_back(1e-300);
    const double s1 = exact_sum(v);
    std::shuffle(v.begin(), v.end(), rng);
    const double s2 = exact_sum(v);
    CHECK(s1 == 1e-300);
    CHECK(s2 == 1e-300);
    CHECK(exact_sum(std::vector<double>{1e16, 1.0, -1e16}) == 1.0);
}
