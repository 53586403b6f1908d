#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hjblab/deterministic.hpp"
#include "hjblab/expected.hpp"
#include "hjblab/field.hpp"
#include "hjblab/grid.hpp"
#include "hjblab/sampling.hpp"

namespace hjb {

/// Worst signed margin of an inequality over a sample set; the check passes
/// iff worst_margin >= -tolerance.
struct EstimateReport {
    std::string name;
    std::string samples;
    double worst_margin = 0.0;
    double worst_t = 0.0;
    std::vector<double> worst_x;
    std::string worst_direction;
    double tolerance = 0.0;
    std::size_t evaluated = 0;
    bool passed = true;
    /// Named auxiliary statistics (e.g. the opposite side of a two-sided bound).
    std::vector<std::pair<std::string, double>> metrics;

    [[nodiscard]] std::optional<double> metric(const std::string& key) const;
};

std::string report_to_json(const EstimateReport& report);
std::string reports_to_json(const std::vector<EstimateReport>& reports);
/// Fixed-width human-readable table, one row per report.
std::string reports_to_table(const std::vector<EstimateReport>& reports);

/// t -> omega(t) = sum_i lambda_i^-1 log(1 + C lambda_i t) over `modes`
/// modes (all when unset).
struct Modulus {
    EigenSpectrum spectrum;
    double C = 0.0;
    std::optional<std::size_t> modes;
};

Expected<CertifiedSum> omega(const Modulus& modulus, double t, double tol);

/// phi_ii <= phi0_ii / (1 + lambda_i phi0_ii t) + tol. A missing phi0_ii
/// bound uses its infinite-curvature limit 1 / (lambda_i t).
Expected<EstimateReport> check_second_derivative_decay(const SolutionField& field,
                                                       const std::vector<std::optional<double>>& phi0_ii_sup,
                                                       const SampleSet& samples, double tol);

/// xi^T D^2 phi xi <= t^-1 <A^-1 xi, xi> + tol for every direction, and
/// |phi_ij| <= sqrt(b_i b_j) + tol for i != j, where b_i is the decay bound
/// of check_second_derivative_decay (1/(lambda_i t) when phi0_ii is unknown).
/// Off-diagonal pairs are limited to the first `pair_modes` coordinates.
Expected<EstimateReport> check_hessian_metric_bound(const SolutionField& field, const SampleSet& samples,
                                                    const std::vector<std::vector<double>>& directions,
                                                    const std::vector<std::optional<double>>& phi0_ii_sup,
                                                    double tol, std::size_t pair_modes = 8);

/// |grad phi| <= sqrt(2 (phi - inf phi0) / t),
/// |phi_i| <= sqrt(2 (phi - inf phi0) / (lambda_i t)),
/// <A grad phi, grad phi> <= 4 ((phi - inf phi0) / t)^2.
Expected<EstimateReport> check_gradient_bounds(const SolutionField& field, double phi0_inf, const SampleSet& samples,
                                               double tol);

/// psi - tol <= phi <= psi + omega(t) + tol. Metric "upper_margin_max"
/// records the largest psi + omega - phi seen (zero when the bound is tight).
Expected<EstimateReport> check_sandwich(const SolutionField& field, const InitialCondition& phi0,
                                        const EigenSpectrum& spectrum, const Modulus& modulus,
                                        const SampleSet& samples, double tol);

struct ResidualStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    /// eps_d = sum_{i >= d} lambda_i^-1 over the whole spectrum.
    double epsilon_d = 0.0;
    /// Worst of R + tol and eps_d/t + tol - R; the band holds iff >= 0.
    double worst_margin = 0.0;
    std::size_t evaluated = 0;
    bool passed = true;
};

/// R = d_t phi + 1/2 <A grad phi, grad phi> - sum_{i<d} phi_ii, the residual
/// of the transformed equation truncated to the first d directions; checks
/// -tol <= R <= eps_d / t + tol.
Expected<ResidualStats> transformed_residual(const SolutionField& field, const EigenSpectrum& spectrum, std::size_t d,
                                             const SampleSet& samples, double tol);

/// sum_{i >= d} lambda_i^-1, certified to 1e-14 relative for power laws.
Expected<double> epsilon_tail(const EigenSpectrum& spectrum, std::size_t d);

struct GapReport {
    double sup_gap = 0.0;
    double gap_at_gamma = 0.0;
    double worst_t = 0.0;
    std::vector<double> worst_x;
    double tolerance = 0.0;
    bool passed = true;
};

/// sup |phi_a - phi_b| over times in [gamma, T] x points; passes iff the sup
/// does not exceed the gap at the first time >= gamma by more than tol.
Expected<GapReport> comparison_gap(const SolutionField& a, const SolutionField& b, double gamma, double T,
                                   const std::vector<double>& times, const std::vector<TruncatedPoint>& points,
                                   double tol);

/// max over samples at each time of |d_t phi| / (|Bx|^2 + 1). Passes iff all
/// ratios are finite and the per-time maxima are non-increasing up to tol.
/// Metrics: "ratio@<t>" per time.
Expected<EstimateReport> time_derivative_growth_check(const SolutionField& field, const SampleSet& samples,
                                                      double tol);

struct OracleErrorReport {
    double sup_error = 0.0;
    double worst_t = 0.0;
    std::vector<double> worst_x;
    std::size_t evaluated = 0;
};

/// sup |grid - oracle| over the grid nodes in [-window, window]^dim at every
/// stored time >= t_min. The oracle is exact per axis: the Riccati closed
/// form for diagonal quadratic data, Cole-Hopf quadrature for separable data.
Expected<OracleErrorReport> grid_oracle_error(const GridField& grid, const InitialCondition& phi0, double t_min,
                                              double window, const QuadratureConfig& quad = {});

}  // namespace hjb
