#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hjblab/expected.hpp"
#include "hjblab/initial_condition.hpp"
#include "hjblab/quadratic.hpp"
#include "hjblab/spectrum.hpp"

namespace hjb {

struct QuadratureConfig {
    /// Trapezoid nodes per curvature length 1/sqrt(1/(2t) + lambda sup f''/2).
    double points_per_scale = 16.0;
    /// The integrand at both window edges must be below this fraction of its
    /// peak; at most 1e-14.
    double edge_ratio = 1e-16;
    std::size_t max_nodes = 4'000'000;
    /// Fixed half-width around the integrand peak; adaptive when unset.
    std::optional<double> half_width;
};

/// Viscous 1-D solution u of u_t = u_xx - lambda/2 u_x^2, u(0) = f, and its
/// derivatives, all from one heat-kernel quadrature.
struct ColeHopfPoint {
    double value = 0.0;
    double dx = 0.0;
    double dxx = 0.0;
    double dt = 0.0;
    /// Deterministic value psi(t, x) of the same profile; value - psi >= 0.
    double psi = 0.0;
    std::size_t nodes = 0;
};

/// u = -(2/lambda) log[(4 pi t)^-1/2 int exp(-(x-y)^2/4t - lambda f(y)/2) dy],
/// evaluated relative to the integrand peak so nothing overflows.
/// Derivatives come from the first two moments of the normalized integrand.
Expected<ColeHopfPoint> cole_hopf_point(const Profile1D& profile, double lambda, double t, double x,
                                        const QuadratureConfig& quad = {});

Expected<double> cole_hopf_1d(const Profile1D& profile, double lambda, double t, double x,
                              const QuadratureConfig& quad = {});

/// sum_i u_i(t, x_i) over the profiles; coordinates without a profile carry
/// the zero profile and profiles past the level are frozen at x_i = 0.
Expected<ScalarOrVector> separable_eval(const std::vector<Profile1D>& profiles, const EigenSpectrum& spectrum,
                                        double t, const TruncatedPoint& x, EvalMode mode,
                                        const QuadratureConfig& quad = {});

}  // namespace hjb
