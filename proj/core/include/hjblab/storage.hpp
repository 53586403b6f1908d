#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hjblab/expected.hpp"
#include "hjblab/field.hpp"
#include "hjblab/quadratic.hpp"
#include "hjblab/spectrum.hpp"

namespace hjb {

/// Philox4x32-10 counter-based generator: a pure function of (counter, key).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;
    static Counter generate(Counter ctr, Key key) noexcept;
};

/// Standard normals for (path, step) drawn from a per-path Philox stream, so
/// a path's noise does not depend on how many other paths exist. Two normals
/// per block by Box-Muller on 53-bit uniforms in (0, 1].
void philox_normals(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::span<double> out);

/// Real orthonormal discrete Fourier basis on N periodic sites, ordered to
/// match the sorted circle spectrum: constant, (cos k, sin k) for
/// k = 1..(N-1)/2, then the alternating mode when N is even.
class FourierBasis {
public:
    explicit FourierBasis(std::size_t sites);

    [[nodiscard]] std::size_t sites() const noexcept { return n_; }
    /// Frequency k of eigen-index i.
    [[nodiscard]] std::size_t frequency(std::size_t i) const noexcept { return freq_[i]; }
    /// Site values to eigen-coordinates.
    [[nodiscard]] std::vector<double> to_eigen(std::span<const double> site) const;
    /// Eigen-coordinates to site values.
    [[nodiscard]] std::vector<double> to_site(std::span<const double> eigen) const;

private:
    std::size_t n_;
    std::vector<std::size_t> freq_;
    std::vector<double> rows_;  // rows_[i * n + s] = e_i(s)
};

struct MarketConfig {
    std::size_t sites = 4;
    /// Reporting scale only; dynamics use unit diffusion.
    double sigma = 1.0;
    double horizon = 1.0;
    double dt = 1e-3;
    std::size_t paths = 10000;
    std::uint64_t seed = 0;
    /// Terminal objective 1/2 sum mu0_i K_i^2 in the circle eigenbasis.
    QuadraticData objective{ConstantRule{1.0}};
    /// Calendar times recorded for every path; s = 0 is always included.
    std::vector<double> checkpoints;
    /// Paths whose full trajectories are kept.
    std::size_t record_paths = 0;

    /// c = 1 / N^2.
    [[nodiscard]] double transfer_cost() const noexcept {
        return 1.0 / (static_cast<double>(sites) * static_cast<double>(sites));
    }
};

/// Circle economy: spectrum of I - N^2 Delta_disc, Fourier basis and the
/// closed-form value field of the terminal objective.
struct CircleMarket {
    MarketConfig config;
    EigenSpectrum spectrum;
    FourierBasis basis;
    SolutionField field;
};

/// Fails with NonConvex when some mu0_i < 0.
Expected<CircleMarket> circle_value_field(const MarketConfig& config);

/// p = grad phi(time_to_go, k) in the site basis.
Expected<std::vector<double>> equilibrium_prices(const CircleMarket& market, double time_to_go,
                                                 std::span<const double> k_site);

/// f_n = (p_{n+1} - p_n) / c with indices mod N.
std::vector<double> transfer_flows(std::span<const double> prices, double c);

/// sum_n (f_{n-1} - f_n), accumulated exactly; zero for any flows.
double net_transfer(std::span<const double> flows);

struct StorageState {
    double s = 0.0;
    std::vector<double> k;
    std::vector<double> p;
    std::vector<double> f;
    double running_cost = 0.0;
};

struct PathEnsemble {
    MarketConfig config;
    std::vector<double> k0;
    /// Checkpoint times, starting with 0, and their step indices.
    std::vector<double> checkpoint_times;
    std::vector<std::size_t> checkpoint_steps;
    /// [path][checkpoint][site].
    std::vector<std::vector<std::vector<double>>> k_at;
    std::vector<std::vector<std::vector<double>>> p_at;
    std::vector<double> running_cost;
    std::vector<double> terminal_cost;
    /// Full trajectories of the first record_paths paths, one state per step.
    std::vector<std::vector<StorageState>> trajectories;
    /// Largest |sum_n (f_{n-1} - f_n)| seen over every path and step.
    double max_net_transfer = 0.0;
    std::size_t steps = 0;
};

/// Euler-Maruyama for dK = -A grad phi(T - s, K) ds + sqrt(2) dW in the
/// eigenbasis; running cost 1/2 <A^-1 a, a> ds for the control a.
Expected<PathEnsemble> simulate_paths(const CircleMarket& market, std::span<const double> k0_site);

struct McValueReport {
    double mc_estimate = 0.0;
    double std_error = 0.0;
    double field_value = 0.0;
    double z_score = 0.0;
    double bias_allowance = 0.0;
    bool passed = true;
};

/// Mean of running + terminal cost against phi(T, k0); passes iff the gap is
/// within 3 standard errors plus bias_allowance.
Expected<McValueReport> verify_value_mc(const PathEnsemble& ensemble, const CircleMarket& market,
                                        double bias_allowance = 0.0);

struct DriftRow {
    std::size_t checkpoint = 0;
    double s = 0.0;
    std::size_t site = 0;
    double mean_k = 0.0;
    double mean_p = 0.0;
    double se_p = 0.0;
    /// E[p(s_j)] - E[p(s_{j-1})] and its paired standard error.
    double drift = 0.0;
    double se_drift = 0.0;
    bool within = true;
};

struct MartingaleReport {
    std::vector<DriftRow> rows;
    double worst_z = 0.0;
    bool passed = true;
};

/// Per-site price drift between consecutive checkpoints; passes iff every
/// drift is within 3 standard errors of 0.
MartingaleReport martingale_diagnostic(const PathEnsemble& ensemble);

/// CSV with header checkpoint,s,site,mean_k,mean_p,se_p,drift,se_drift.
void write_drift_csv(std::ostream& os, const MartingaleReport& report);

/// Mean and standard error of a sample, both accumulated exactly so the
/// result is independent of order and thread count.
std::pair<double, double> mean_and_se(std::span<const double> values);

}  // namespace hjb
