#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "hjblab/expected.hpp"
#include "hjblab/spectrum.hpp"

namespace hjb {

struct ConstantRule {
    double value = 0.0;
};
/// Explicit curvatures; modes past the end of the list have curvature zero.
struct ListRule {
    std::vector<double> values;
};

/// Diagonal quadratic initial data phi_0(x) = 1/2 sum mu0_i x_i^2.
struct QuadraticData {
    std::variant<ConstantRule, ListRule> mu0;

    [[nodiscard]] double mu0_at(std::size_t i) const noexcept;
    [[nodiscard]] double sup_abs() const noexcept;
    [[nodiscard]] double sup() const noexcept;
    /// Number of explicitly listed modes; nullopt for a constant rule.
    [[nodiscard]] std::optional<std::size_t> support() const noexcept;
    /// True iff every curvature is non-negative, i.e. a global solution exists.
    [[nodiscard]] bool admissible() const noexcept;
};

Expected<QuadraticData> make_quadratic_data(std::variant<ConstantRule, ListRule> mu0);

/// Exact solution phi(t,x) = c(t) + 1/2 sum mu_i(t) x_i^2 of the HJB
/// equation. With a level N only modes 0..N are kept (the Galerkin problem).
struct QuadraticSolution {
    EigenSpectrum spectrum;
    QuadraticData data;
    std::optional<std::size_t> level;
    /// Tail tolerance used when c(t) is an infinite series.
    double c_tolerance = 1e-10;

    /// Number of modes carried, nullopt when infinite.
    [[nodiscard]] std::optional<std::size_t> mode_count() const noexcept;
};

Expected<QuadraticSolution> make_quadratic_solution(EigenSpectrum spectrum, QuadraticData data,
                                                    std::optional<std::size_t> level = std::nullopt);

/// Riccati flow mu0 / (1 + lambda mu0 t). Fails with the blow-up time when
/// the denominator vanishes before t.
Expected<double> riccati_mu(double mu0, double lambda, double t);

/// -1 / (lambda mu0) for negative curvature, nullopt otherwise.
std::optional<double> blowup_time(double mu0, double lambda);

/// A series value with a rigorous bound on |value - exact|.
struct CertifiedSum {
    double value = 0.0;
    double error_bound = 0.0;
    std::size_t terms = 0;
};

/// sum_i lambda_i^-1 log(1 + lambda_i a_i t) over the first n_modes modes
/// (all modes when nullopt), where a_i follows the curvature rule. Infinite
/// power-law sums are bracketed between the integrals of the decreasing
/// majorant from n and n+1 until the bracket is below tol.
Expected<CertifiedSum> log_series(const EigenSpectrum& spectrum, const QuadraticData& rule, double t,
                                  std::optional<std::size_t> n_modes, double tol);

/// c(t) of the quadratic solution, certified to tol.
Expected<CertifiedSum> c_of_t(const QuadraticSolution& solution, double t, double tol);

/// c'(t) = sum_i mu_i(t), certified to tol. Infinite power-law sums are
/// bracketed between integrals of 1/(t x^alpha) - 1/(mu0 t^2 x^(2 alpha))
/// and 1/(t x^alpha).
Expected<CertifiedSum> c_dot(const QuadraticSolution& solution, double t, double tol);

enum class EvalMode { Value, Gradient, HessianDiagonal };
using ScalarOrVector = std::variant<double, std::vector<double>>;

Expected<ScalarOrVector> eval_quadratic(const QuadraticSolution& solution, double t,
                                        const TruncatedPoint& x, EvalMode mode);

/// d/dt phi(t, x) = c'(t) - 1/2 sum lambda_i mu_i(t)^2 x_i^2.
Expected<double> quadratic_time_derivative(const QuadraticSolution& solution, double t, const TruncatedPoint& x);

/// mu_i(t) for i < n, failing on blow-up.
Expected<std::vector<double>> riccati_curvatures(const QuadraticSolution& solution, double t, std::size_t n);

struct RiccatiCrosscheck {
    double closed_form = 0.0;
    double integrated = 0.0;
    double abs_error = 0.0;
};

/// Integrates mu' = -lambda mu^2 with fixed-step RK4 and compares to the
/// closed form.
Expected<RiccatiCrosscheck> riccati_ode_crosscheck(double mu0, double lambda, double t, std::size_t steps);

}  // namespace hjb
