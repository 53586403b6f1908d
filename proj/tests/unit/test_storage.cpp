#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hjblab/storage.hpp"

using namespace hjb;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::generate(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("Philox normals are reproducible and standard") {
    std::vector<double> a(7), b(7);
    philox_normals(3, 10, 20, a);
    philox_normals(3, 10, 20, b);
    CHECK(a == b);
    philox_normals(3, 11, 20, b);
    CHECK(a != b);

    double s = 0.0, s2 = 0.0;
    const std::size_t n = 200000;
    std::vector<double> z(2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        philox_normals(1, k, 0, z);
        for (double v : z) {
            s += v;
            s2 += v * v;
        }
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    CHECK(std::fabs(mean) <= 5.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::fabs(var - 1.0) <= 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("Fourier basis diagonalizes the circle operator") {
    for (std::size_t N : {3u, 4u, 5u, 8u}) {
        const FourierBasis basis(N);
        const auto spec = make_spectrum(CircleSpec{N}).value();
        const double n2 = static_cast<double>(N * N);
        for (std::size_t i = 0; i < N; ++i) {
            std::vector<double> e(N, 0.0);
            e[i] = 1.0;
            const auto v = basis.to_site(e);
            // Dense (I - N^2 Delta) v.
            double norm = 0.0;
            for (std::size_t s = 0; s < N; ++s) {
                const double lap = v[(s + 1) % N] - 2.0 * v[s] + v[(s + N - 1) % N];
                CHECK(v[s] - n2 * lap == doctest::Approx(spec.eigenvalue(i) * v[s]).scale(1.0).epsilon(1e-10));
                norm += v[s] * v[s];
            }
            CHECK(norm == doctest::Approx(1.0));
        }
        std::vector<double> site{0.3, -1.0, 2.0, 0.5, 0.1, -0.7, 0.9, 1.1};
        site.resize(N);
        const auto back = basis.to_site(basis.to_eigen(site));
        for (std::size_t s = 0; s < N; ++s) CHECK(back[s] == doctest::Approx(site[s]).scale(1.0).epsilon(1e-13));
    }
}

TEST_CASE("net transfer vanishes exactly for arbitrary flows") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> p(2 + rep % 9);
        for (double& v : p) v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
        const auto f = transfer_flows(p, 1.0 / 49.0);
        CHECK(net_transfer(f) == 0.0);
    }
}

TEST_CASE("circle market simulation is reproducible and conservative") {
    MarketConfig cfg;
    cfg.sites = 4;
    cfg.paths = 300;
    cfg.dt = 5e-3;
    cfg.seed = 42;
    cfg.record_paths = 2;
    const auto market = circle_value_field(cfg);
    REQUIRE(market);
    const std::vector<double> k0{1.0, -0.5, 0.25, 0.5};
    auto a = simulate_paths(*market, k0);
    auto b = simulate_paths(*market, k0);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->terminal_cost == b->terminal_cost);
    CHECK(a->running_cost == b->running_cost);
    CHECK(a->max_net_transfer == 0.0);
    CHECK(a->trajectories.size() == 2);
    CHECK(a->checkpoint_times.front() == 0.0);
    CHECK(a->checkpoint_times.size() == 6);

    // The first paths do not depend on how many paths run alongside them.
    cfg.paths = 5;
    const auto small = circle_value_field(cfg);
    auto c = simulate_paths(*small, k0);
    REQUIRE(c);
    for (std::size_t p = 0; p < 5; ++p) CHECK(c->terminal_cost[p] == a->terminal_cost[p]);

    // Prices at s = 0 are the gradient of the value at the full horizon.
    auto p0 = equilibrium_prices(*market, cfg.horizon, k0);
    REQUIRE(p0);
    for (std::size_t s = 0; s < 4; ++s) CHECK(a->p_at[0][0][s] == doctest::Approx((*p0)[s]));

    cfg.objective = QuadraticData{ListRule{{1.0, -0.5}}};
    CHECK(!circle_value_field(cfg));
}

TEST_CASE("mean and standard error") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto [m, se] = mean_and_se(v);
    CHECK(m == 2.5);
    CHECK(se == doctest::Approx(std::sqrt((2.25 * 2 + 0.25 * 2) / 3.0 / 4.0)));
}
