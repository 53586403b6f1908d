#include "hjblab/storage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>
#include <numbers>
#include <ostream>

#include "hjblab/exact_sum.hpp"
#include "hjblab/parallel.hpp"

namespace hjb {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// (0, 1], so the logarithm in Box-Muller is finite.
double unit_open_closed(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

void philox_normals(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::span<double> out) {
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    for (std::size_t b = 0; 2 * b < out.size(); ++b) {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(step),
                                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
        const auto r = Philox4x32::generate(ctr, key);
        const double u1 = unit_open_closed(r[0], r[1]);
        const double u2 = unit_open_closed(r[2], r[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out[2 * b] = radius * std::cos(angle);
        if (2 * b + 1 < out.size()) out[2 * b + 1] = radius * std::sin(angle);
    }
}

FourierBasis::FourierBasis(std::size_t sites) : n_(sites), rows_(sites * sites) {
    const double n = static_cast<double>(sites);
    const double c0 = 1.0 / std::sqrt(n);
    const double c1 = std::sqrt(2.0 / n);
    auto row = [&](std::size_t k, auto&& fn) {
        const std::size_t i = freq_.size();
        freq_.push_back(k);
        for (std::size_t s = 0; s < n_; ++s) rows_[i * n_ + s] = fn(s);
    };
    row(0, [&](std::size_t) { return c0; });
    for (std::size_t k = 1; 2 * k < n_; ++k) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / n;
        row(k, [&](std::size_t s) { return c1 * std::cos(w * static_cast<double>(s)); });
        row(k, [&](std::size_t s) { return c1 * std::sin(w * static_cast<double>(s)); });
    }
    if (n_ % 2 == 0) row(n_ / 2, [&](std::size_t s) { return s % 2 == 0 ? c0 : -c0; });
}

std::vector<double> FourierBasis::to_eigen(std::span<const double> site) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (std::size_t s = 0; s < n_; ++s) acc += rows_[i * n_ + s] * site[s];
        out[i] = acc;
    }
    return out;
}

std::vector<double> FourierBasis::to_site(std::span<const double> eigen) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t s = 0; s < n_; ++s) out[s] += rows_[i * n_ + s] * eigen[i];
    }
    return out;
}

Expected<CircleMarket> circle_value_field(const MarketConfig& config) {
    if (config.sites < 2) return unexpected(ErrorCode::InvalidArgument, "circle market needs at least 2 sites");
    if (const auto n = config.objective.support(); n && *n > config.sites) {
        return unexpected(ErrorCode::InvalidArgument, "objective lists more curvatures than sites");
    }
    if (!config.objective.admissible()) {
        return unexpected(ErrorCode::NonConvex, "terminal objective has a negative curvature");
    }
    auto spectrum = make_spectrum(CircleSpec{config.sites});
    if (!spectrum) return unexpected(spectrum.error());
    auto sol = make_quadratic_solution(*spectrum, config.objective, config.sites - 1);
    if (!sol) return unexpected(sol.error());
    return CircleMarket{config, *spectrum, FourierBasis(config.sites), SolutionField(ClosedFormQuadratic{*sol})};
}

Expected<std::vector<double>> equilibrium_prices(const CircleMarket& market, double time_to_go,
                                                 std::span<const double> k_site) {
    if (k_site.size() != market.config.sites) {
        return unexpected(ErrorCode::InvalidArgument, "storage vector length differs from the site count");
    }
    auto g = market.field.gradient(time_to_go, TruncatedPoint(market.basis.to_eigen(k_site)));
    if (!g) return unexpected(g.error());
    return market.basis.to_site(*g);
}

std::vector<double> transfer_flows(std::span<const double> prices, double c) {
    const std::size_t n = prices.size();
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = (prices[(i + 1) % n] - prices[i]) / c;
    return f;
}

double net_transfer(std::span<const double> flows) {
    const std::size_t n = flows.size();
    ExactSum acc;
    for (std::size_t i = 0; i < n; ++i) {
        acc.add(flows[(i + n - 1) % n]);
        acc.add(-flows[i]);
    }
    return acc.value();
}

Expected<PathEnsemble> simulate_paths(const CircleMarket& market, std::span<const double> k0_site) {
    const auto& cfg = market.config;
    const std::size_t n = cfg.sites;
    if (k0_site.size() != n) return unexpected(ErrorCode::InvalidArgument, "k0 length differs from the site count");
    if (!(cfg.horizon > 0.0) || !(cfg.dt > 0.0) || cfg.dt > cfg.horizon) {
        return unexpected(ErrorCode::InvalidArgument, "requires 0 < dt <= horizon");
    }
    if (cfg.paths == 0) return unexpected(ErrorCode::InvalidArgument, "path count must be positive");
    const double lattice_tol = 1e-9 * cfg.horizon;
    const auto steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
    if (std::fabs(static_cast<double>(steps) * cfg.dt - cfg.horizon) > lattice_tol) {
        return unexpected(ErrorCode::InvalidArgument, "horizon is not a whole number of steps");
    }
    if (steps >= (std::size_t{1} << 32)) return unexpected(ErrorCode::InvalidArgument, "too many steps");

    std::vector<double> lambda(n), mu0(n);
    double stiffness = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lambda[i] = market.spectrum.eigenvalue(i);
        mu0[i] = cfg.objective.mu0_at(i);
        stiffness = std::max(stiffness, lambda[i] * mu0[i]);
    }
    if (stiffness * cfg.dt > 0.5) {
        return unexpected(ErrorCode::Stability, "dt too large: max lambda_i mu0_i dt = " +
                                                    std::to_string(stiffness * cfg.dt) + " > 0.5");
    }

    PathEnsemble ens;
    ens.config = cfg;
    ens.k0.assign(k0_site.begin(), k0_site.end());
    ens.steps = steps;
    std::vector<double> cps = cfg.checkpoints;
    if (cps.empty()) {
        for (int j = 1; j <= 5; ++j) cps.push_back(cfg.horizon * j / 5.0);
    }
    std::sort(cps.begin(), cps.end());
    ens.checkpoint_times.push_back(0.0);
    ens.checkpoint_steps.push_back(0);
    for (double s : cps) {
        if (s < -lattice_tol || s > cfg.horizon + lattice_tol) {
            return unexpected(ErrorCode::InvalidArgument, "checkpoint outside [0, horizon]");
        }
        const auto k = static_cast<std::size_t>(std::llround(s / cfg.dt));
        if (std::fabs(static_cast<double>(k) * cfg.dt - s) > lattice_tol) {
            return unexpected(ErrorCode::InvalidArgument, "checkpoint is not on the step lattice");
        }
        if (k == ens.checkpoint_steps.back()) continue;
        ens.checkpoint_times.push_back(s);
        ens.checkpoint_steps.push_back(k);
    }

    // mu[m * n + i] = mu_i(T - m dt), shared by every path.
    std::vector<double> mu((steps + 1) * n);
    for (std::size_t m = 0; m <= steps; ++m) {
        const double tau = m == steps ? 0.0 : cfg.horizon - static_cast<double>(m) * cfg.dt;
        for (std::size_t i = 0; i < n; ++i) {
            auto v = riccati_mu(mu0[i], lambda[i], tau);
            if (!v) return unexpected(v.error());
            mu[m * n + i] = *v;
        }
    }

    const std::size_t ncp = ens.checkpoint_steps.size();
    const std::size_t P = cfg.paths;
    ens.k_at.assign(P, std::vector<std::vector<double>>(ncp));
    ens.p_at.assign(P, std::vector<std::vector<double>>(ncp));
    ens.running_cost.assign(P, 0.0);
    ens.terminal_cost.assign(P, 0.0);
    ens.trajectories.resize(std::min(cfg.record_paths, P));
    std::vector<double> worst(P, 0.0);
    const std::vector<double> k0_eigen = market.basis.to_eigen(k0_site);
    const double c = cfg.transfer_cost();
    const double noise = std::sqrt(2.0 * cfg.dt);

    parallel_for(P, [&](std::size_t path) {
        std::vector<double> K = k0_eigen, z(n), p_eigen(n);
        double running = 0.0;
        std::size_t next_cp = 0;
        for (std::size_t m = 0;; ++m) {
            const double* mu_m = &mu[m * n];
            for (std::size_t i = 0; i < n; ++i) p_eigen[i] = mu_m[i] * K[i];
            const auto p = market.basis.to_site(p_eigen);
            const auto f = transfer_flows(p, c);
            worst[path] = std::max(worst[path], std::fabs(net_transfer(f)));
            const bool at_cp = next_cp < ncp && ens.checkpoint_steps[next_cp] == m;
            const bool record = path < ens.trajectories.size();
            if (at_cp || record) {
                auto k_site = market.basis.to_site(K);
                if (record) {
                    ens.trajectories[path].push_back(
                        StorageState{static_cast<double>(m) * cfg.dt, k_site, p, f, running});
                }
                if (at_cp) {
                    ens.k_at[path][next_cp] = std::move(k_site);
                    ens.p_at[path][next_cp] = p;
                    ++next_cp;
                }
            }
            if (m == steps) break;
            philox_normals(cfg.seed, path, m, z);
            double cost = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double a = -lambda[i] * p_eigen[i];
                cost += a * a / lambda[i];
                K[i] += a * cfg.dt + noise * z[i];
            }
            running += 0.5 * cost * cfg.dt;
        }
        double terminal = 0.0;
        for (std::size_t i = 0; i < n; ++i) terminal += mu0[i] * K[i] * K[i];
        ens.running_cost[path] = running;
        ens.terminal_cost[path] = 0.5 * terminal;
    });
    ens.max_net_transfer = *std::max_element(worst.begin(), worst.end());
    return ens;
}

std::pair<double, double> mean_and_se(std::span<const double> values) {
    if (values.empty()) return {0.0, 0.0};
    const double count = static_cast<double>(values.size());
    const double mean = exact_sum(values) / count;
    if (values.size() < 2) return {mean, 0.0};
    ExactSum ss;
    for (double v : values) ss.add((v - mean) * (v - mean));
    return {mean, std::sqrt(ss.value() / (count - 1.0) / count)};
}

Expected<McValueReport> verify_value_mc(const PathEnsemble& ensemble, const CircleMarket& market,
                                        double bias_allowance) {
    std::vector<double> total(ensemble.running_cost.size());
    for (std::size_t k = 0; k < total.size(); ++k) total[k] = ensemble.running_cost[k] + ensemble.terminal_cost[k];
    auto field = market.field.value(ensemble.config.horizon, TruncatedPoint(market.basis.to_eigen(ensemble.k0)));
    if (!field) return unexpected(field.error());
    McValueReport rep;
    std::tie(rep.mc_estimate, rep.std_error) = mean_and_se(total);
    rep.field_value = *field;
    rep.bias_allowance = bias_allowance;
    const double gap = rep.mc_estimate - rep.field_value;
    rep.z_score = rep.std_error > 0.0 ? gap / rep.std_error : (gap == 0.0 ? 0.0 : std::copysign(INFINITY, gap));
    rep.passed = std::fabs(gap) <= 3.0 * rep.std_error + bias_allowance;
    return rep;
}

MartingaleReport martingale_diagnostic(const PathEnsemble& ensemble) {
    MartingaleReport rep;
    const std::size_t P = ensemble.p_at.size();
    const std::size_t n = ensemble.config.sites;
    std::vector<double> k(P), p(P), d(P);
    for (std::size_t j = 0; j < ensemble.checkpoint_times.size(); ++j) {
        for (std::size_t site = 0; site < n; ++site) {
            for (std::size_t q = 0; q < P; ++q) {
                k[q] = ensemble.k_at[q][j][site];
                p[q] = ensemble.p_at[q][j][site];
                d[q] = j == 0 ? 0.0 : p[q] - ensemble.p_at[q][j - 1][site];
            }
            DriftRow row;
            row.checkpoint = j;
            row.s = ensemble.checkpoint_times[j];
            row.site = site;
            row.mean_k = mean_and_se(k).first;
            std::tie(row.mean_p, row.se_p) = mean_and_se(p);
            std::tie(row.drift, row.se_drift) = mean_and_se(d);
            row.within = std::fabs(row.drift) <= 3.0 * row.se_drift;
            if (row.se_drift > 0.0) rep.worst_z = std::max(rep.worst_z, std::fabs(row.drift) / row.se_drift);
            rep.passed = rep.passed && row.within;
            rep.rows.push_back(row);
        }
    }
    return rep;
}

void write_drift_csv(std::ostream& os, const MartingaleReport& report) {
    os << "checkpoint,s,site,mean_k,mean_p,se_p,drift,se_drift\n";
    char buf[512];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.checkpoint, r.s, r.site,
                      r.mean_k, r.mean_p, r.se_p, r.drift, r.se_drift);
        os << buf;
    }
}

}  // namespace hjb
