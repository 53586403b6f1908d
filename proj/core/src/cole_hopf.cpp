#include "hjblab/cole_hopf.hpp"

#include <cmath>
#include <numbers>

#include "hjblab/deterministic.hpp"

namespace hjb {

Expected<ColeHopfPoint> cole_hopf_point(const Profile1D& profile, double lambda, double t, double x,
                                        const QuadratureConfig& quad) {
    if (t == 0.0) return unexpected(ErrorCode::InvalidArgument, "t = 0: query the profile directly");
    if (!(t > 0.0) || !(lambda > 0.0)) return unexpected(ErrorCode::InvalidArgument, "t and lambda must be positive");
    if (!(quad.edge_ratio > 0.0 && quad.edge_ratio <= 1e-14) || !(quad.points_per_scale >= 2.0)) {
        return unexpected(ErrorCode::InvalidArgument, "invalid quadrature config");
    }
    // The integrand peak is the Lax-Oleinik minimizer, and its height is -lambda psi / 2.
    auto lo = lax_oleinik_1d(profile, lambda, t, x);
    if (!lo) return unexpected(lo.error());
    const double ystar = lo->minimizer;
    const double psi = lo->psi;

    const double log_h_peak = -0.25 * (x - ystar) * (x - ystar) / t - 0.5 * lambda * profile.value(ystar);
    const auto log_ratio = [&](double y) {
        const double d = x - y;
        return -0.25 * d * d / t - 0.5 * lambda * profile.value(y) - log_h_peak;
    };

    const double kappa = 0.5 / t + 0.5 * lambda * profile.curvature_sup();
    const double step = 1.0 / (std::sqrt(kappa) * quad.points_per_scale);
    const double cutoff = std::log(quad.edge_ratio);

    // Sums of w, w d, w d^2 with d = y - y*; the peak node has weight 1.
    double s0 = 1.0, s1 = 0.0, s2 = 0.0;
    std::size_t nodes = 1;
    for (int side : {-1, 1}) {
        const std::size_t fixed_steps =
            quad.half_width ? static_cast<std::size_t>(std::ceil(*quad.half_width / step)) : 0;
        for (std::size_t k = 1;; ++k) {
            const double d = side * static_cast<double>(k) * step;
            const double lr = log_ratio(ystar + d);
            if (quad.half_width) {
                if (k > fixed_steps) {
                    if (lr > cutoff) {
                        return unexpected(ErrorCode::WindowTooSmall,
                                          "integrand at the window edge exceeds the decay threshold");
                    }
                    break;
                }
            } else if (lr < cutoff) {
                break;
            }
            const double w = std::exp(lr);
            s0 += w;
            s1 += w * d;
            s2 += w * d * d;
            if (++nodes > quad.max_nodes) {
                return unexpected(ErrorCode::WindowTooSmall, "quadrature node budget exhausted before edge decay");
            }
        }
    }

    const double mean_d = s1 / s0;
    const double var = std::max(0.0, s2 / s0 - mean_d * mean_d);
    const double m1 = (x - ystar) - mean_d;  // E[x - y]
    const double m2 = var + m1 * m1;         // E[(x - y)^2]

    ColeHopfPoint out;
    out.psi = psi;
    out.nodes = nodes;
    out.value = psi - (2.0 / lambda) * (std::log(s0 * step) - 0.5 * std::log(4.0 * std::numbers::pi * t));
    const double inv_lt = 1.0 / (lambda * t);
    out.dx = m1 * inv_lt;
    out.dxx = inv_lt * (1.0 - var / (2.0 * t));
    out.dt = inv_lt * (1.0 - m2 / (2.0 * t));
    return out;
}

Expected<double> cole_hopf_1d(const Profile1D& profile, double lambda, double t, double x,
                              const QuadratureConfig& quad) {
    auto p = cole_hopf_point(profile, lambda, t, x, quad);
    if (!p) return unexpected(p.error());
    return p->value;
}

Expected<ScalarOrVector> separable_eval(const std::vector<Profile1D>& profiles, const EigenSpectrum& spectrum,
                                        double t, const TruncatedPoint& x, EvalMode mode,
                                        const QuadratureConfig& quad) {
    if (!spectrum.supports(x.size())) {
        return unexpected(ErrorCode::InvalidArgument, "point level exceeds the spectrum capacity");
    }
    std::vector<double> per_mode(x.size(), 0.0);
    double value = 0.0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        if (i >= x.size()) {
            value += profiles[i].value(0.0);
            continue;
        }
        auto p = cole_hopf_point(profiles[i], spectrum.eigenvalue(i), t, x[i], quad);
        if (!p) return unexpected(p.error());
        value += p->value;
        per_mode[i] = mode == EvalMode::Gradient ? p->dx : p->dxx;
    }
    if (mode == EvalMode::Value) return ScalarOrVector{value};
    return ScalarOrVector{std::move(per_mode)};
}

}  // namespace hjb
