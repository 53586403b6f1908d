#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "hjblab/expected.hpp"
#include "hjblab/initial_condition.hpp"
#include "hjblab/quadratic.hpp"
#include "hjblab/spectrum.hpp"

namespace hjb {

struct LaxOleinikConfig {
    double tol = 1e-8;
    std::size_t max_iter = 100000;
};

struct LaxOleinikResult {
    TruncatedPoint minimizer;
    double psi = 0.0;
    /// Euclidean norm of grad J at the returned minimizer.
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// psi(t,x) = inf_y phi0(y) + (1/2t) sum_i (x_i - y_i)^2 / lambda_i over the
/// coordinates of x, minimized by accelerated gradient descent with the
/// diagonal preconditioner t lambda_i / (1 + t lambda_i h_i), h_i being the
/// per-mode curvature bound of phi0 (zero when unknown). Hitting the
/// iteration cap is reported through `converged`, not as an error.
Expected<LaxOleinikResult> lax_oleinik_solve(const InitialCondition& phi0, const EigenSpectrum& spectrum, double t,
                                             const TruncatedPoint& x, const LaxOleinikConfig& cfg = {});

struct LaxOleinikClosed {
    TruncatedPoint minimizer;
    double psi = 0.0;
};

/// y*_i = x_i / (1 + t lambda_i mu0_i), psi = 1/2 sum mu0_i x_i^2 / (1 + lambda_i mu0_i t).
Expected<LaxOleinikClosed> lax_oleinik_quadratic_closed(const QuadraticData& data, const EigenSpectrum& spectrum,
                                                        double t, const TruncatedPoint& x);

struct LaxOleinik1D {
    double minimizer = 0.0;
    double psi = 0.0;
};

/// One-dimensional inf_y f(y) + (x - y)^2 / (2 t lambda) for a convex
/// profile, solved by safeguarded Newton on the monotone optimality condition.
Expected<LaxOleinik1D> lax_oleinik_1d(const Profile1D& profile, double lambda, double t, double x);

/// psi(t, x) by the cheapest exact route: closed form for quadratic data,
/// a sum of 1-D problems for separable data, the descent solver otherwise.
Expected<double> deterministic_value(const InitialCondition& phi0, const EigenSpectrum& spectrum, double t,
                                     const TruncatedPoint& x, const LaxOleinikConfig& cfg = {});

struct BoundsReport {
    bool passed = true;
    /// psi(t,x) - psi(s,x); non-negative when monotone.
    double monotonicity_margin = 0.0;
    /// min(<A^-1 x,x>/(2t) + phi0(0), phi0(x)) - psi(t,x).
    double upper_bound_margin = 0.0;
    double tolerance = 0.0;
    std::string message;
};

/// Checks psi(t,x) >= psi(s,x) for t <= s and
/// psi(t,x) <= min(<A^-1 x, x>/(2t) + phi0(0), phi0(x)), both up to tol.
Expected<BoundsReport> deterministic_bounds_check(const LaxOleinikResult& at_t, const LaxOleinikResult& at_s,
                                                  const InitialCondition& phi0, const EigenSpectrum& spectrum,
                                                  double t, double s, const TruncatedPoint& x, double tol);

/// J(z) for the explicit competitor of the growth counterexample:
/// phi0(y) = <y, x*>^2 with x*_n = (n+1)^-beta, lambda_n = (n+1)^alpha,
/// z_k = x_k for k < N, z_N chosen so that <z, x*> = 0, z_k = 0 beyond N.
/// Coordinates of x past its level are zero.
Expected<double> counterexample_growth(double alpha, double beta, double t, const TruncatedPoint& x, std::size_t N);

/// Running minimum of J(e_n), n <= n_probe, at x = 0 for the nonconvex
/// data phi0(y) = |y|^2 if |y| >= 1 and 2 - |y|^2 otherwise.
Expected<double> counterexample_nonconvex(const EigenSpectrum& spectrum, double t, std::size_t n_probe);

/// The nonconvex initial condition of counterexample_nonconvex.
double nonconvex_profile_value(std::span<const double> y);

}  // namespace hjb
