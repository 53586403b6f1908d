#include "hjblab/deterministic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hjb {

namespace {

struct Objective {
    const InitialCondition& phi0;
    const std::vector<double>& inv_tl;  // 1 / (t lambda_i)
    const std::vector<double>& x;

    double value(const std::vector<double>& y) const {
        double metric = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double d = x[i] - y[i];
            metric += inv_tl[i] * d * d;
        }
        return ic_value(phi0, y) + 0.5 * metric;
    }

    void gradient(const std::vector<double>& y, std::vector<double>& g) const {
        ic_gradient(phi0, y, g);
        for (std::size_t i = 0; i < y.size(); ++i) g[i] += inv_tl[i] * (y[i] - x[i]);
    }
};

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
}

Expected<void> check_time_and_point(const EigenSpectrum& spectrum, double t, const TruncatedPoint& x) {
    if (!(t > 0.0) || !std::isfinite(t)) return unexpected(ErrorCode::InvalidArgument, "t must be positive and finite");
    if (x.size() == 0) return unexpected(ErrorCode::InvalidArgument, "point must have at least one coordinate");
    if (!x.all_finite()) return unexpected(ErrorCode::InvalidArgument, "point has non-finite coordinates");
    if (!spectrum.supports(x.size())) {
        return unexpected(ErrorCode::InvalidArgument, "point level exceeds the spectrum capacity");
    }
    return {};
}

}  // namespace

Expected<LaxOleinikResult> lax_oleinik_solve(const InitialCondition& phi0, const EigenSpectrum& spectrum, double t,
                                             const TruncatedPoint& x, const LaxOleinikConfig& cfg) {
    if (auto ok = check_time_and_point(spectrum, t, x); !ok) return unexpected(ok.error());
    if (!ic_is_convex(phi0)) return unexpected(ErrorCode::NonConvex, "Lax-Oleinik descent requires convex phi0");
    if (!(cfg.tol > 0.0) || cfg.max_iter == 0) return unexpected(ErrorCode::InvalidArgument, "invalid solver config");

    const std::size_t n = x.size();
    std::vector<double> inv_tl(n), precond(n);
    const auto curv = ic_curvature_bounds(phi0, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double tl = t * spectrum.eigenvalue(i);
        inv_tl[i] = 1.0 / tl;
        const double h = std::max(0.0, curv[i].value_or(0.0));
        precond[i] = tl / (1.0 + tl * h);
    }
    const Objective J{phi0, inv_tl, x.coords};

    std::vector<double> y = x.coords;  // warm start: psi <= phi0(x)
    std::vector<double> v = y, y_next(n), g(n), gv(n);
    double Jy = J.value(y);
    double theta = 1.0;
    double step = 1.0;

    LaxOleinikResult res;
    J.gradient(y, g);
    res.residual = norm2(g);
    while (res.residual > cfg.tol && res.iterations < cfg.max_iter) {
        ++res.iterations;
        J.gradient(v, gv);
        const double Jv = J.value(v);
        double decrease = 0.0;
        for (std::size_t i = 0; i < n; ++i) decrease += precond[i] * gv[i] * gv[i];
        double J_next = 0.0;
        // Value comparisons below this are rounding noise.
        const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(Jv));
        for (;;) {
            for (std::size_t i = 0; i < n; ++i) y_next[i] = v[i] - step * precond[i] * gv[i];
            J_next = J.value(y_next);
            if (J_next <= Jv - 0.5 * step * decrease + slack || step < 1e-30) break;
            step *= 0.5;
        }
        if (J_next > Jy + slack) {
            // Momentum overshot: restart from the last accepted iterate.
            v = y;
            theta = 1.0;
            if (step < 1e-30) break;
            continue;
        }
        const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        const double beta = (theta - 1.0) / theta_next;
        for (std::size_t i = 0; i < n; ++i) v[i] = y_next[i] + beta * (y_next[i] - y[i]);
        y.swap(y_next);
        Jy = J_next;
        theta = theta_next;
        step = std::min(1.0, 2.0 * step);
        J.gradient(y, g);
        res.residual = norm2(g);
    }
    res.converged = res.residual <= cfg.tol;
    res.psi = Jy;
    res.minimizer = TruncatedPoint(std::move(y));
    return res;
}

Expected<LaxOleinikClosed> lax_oleinik_quadratic_closed(const QuadraticData& data, const EigenSpectrum& spectrum,
                                                        double t, const TruncatedPoint& x) {
    if (auto ok = check_time_and_point(spectrum, t, x); !ok) return unexpected(ok.error());
    if (!data.admissible()) return unexpected(ErrorCode::NonConvex, "closed form requires mu0 >= 0");
    LaxOleinikClosed out;
    out.minimizer.coords.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double m = data.mu0_at(i);
        const double denom = 1.0 + t * spectrum.eigenvalue(i) * m;
        out.minimizer[i] = x[i] / denom;
        out.psi += 0.5 * m * x[i] * x[i] / denom;
    }
    return out;
}

Expected<LaxOleinik1D> lax_oleinik_1d(const Profile1D& profile, double lambda, double t, double x) {
    if (!(t > 0.0) || !(lambda > 0.0)) return unexpected(ErrorCode::InvalidArgument, "t and lambda must be positive");
    if (!profile.convex()) return unexpected(ErrorCode::NonConvex, "1-D Lax-Oleinik requires a convex profile");
    const double inv_tl = 1.0 / (t * lambda);
    // F is increasing with F' >= 1/(t lambda).
    const auto F = [&](double y) { return profile.derivative(y) + inv_tl * (y - x); };

    double lo = x, hi = x;
    const double f0 = F(x);
    if (f0 == 0.0) return LaxOleinik1D{x, profile.value(x)};
    double width = 1.0;
    if (f0 > 0.0) {
        for (lo = x - width; F(lo) > 0.0; lo = x - width) width *= 2.0;
    } else {
        for (hi = x + width; F(hi) < 0.0; hi = x + width) width *= 2.0;
    }
    double y = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fy = F(y);
        if (fy == 0.0) break;
        if (fy > 0.0) hi = y; else lo = y;
        const double dy = fy / (profile.second_derivative(y) + inv_tl);
        double next = y - dy;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - y) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(y))) {
            y = next;
            break;
        }
        y = next;
    }
    const double d = x - y;
    return LaxOleinik1D{y, profile.value(y) + 0.5 * inv_tl * d * d};
}

Expected<double> deterministic_value(const InitialCondition& phi0, const EigenSpectrum& spectrum, double t,
                                     const TruncatedPoint& x, const LaxOleinikConfig& cfg) {
    if (const auto* q = std::get_if<DiagonalQuadratic>(&phi0)) {
        auto r = lax_oleinik_quadratic_closed(q->data, spectrum, t, x);
        if (!r) return unexpected(r.error());
        return r->psi;
    }
    if (const auto* s = std::get_if<Separable>(&phi0)) {
        if (auto ok = check_time_and_point(spectrum, t, x); !ok) return unexpected(ok.error());
        double psi = 0.0;
        for (std::size_t i = 0; i < s->profiles.size(); ++i) {
            // Modes past the level are frozen at the projected coordinate 0, as in ic_value.
            if (i >= x.size()) {
                psi += s->profiles[i].value(0.0);
                continue;
            }
            auto r = lax_oleinik_1d(s->profiles[i], spectrum.eigenvalue(i), t, x[i]);
            if (!r) return unexpected(r.error());
            psi += r->psi;
        }
        return psi;
    }
    auto r = lax_oleinik_solve(phi0, spectrum, t, x, cfg);
    if (!r) return unexpected(r.error());
    if (!r->converged) return unexpected(ErrorCode::NotConverged, "Lax-Oleinik descent hit the iteration cap");
    return r->psi;
}

Expected<BoundsReport> deterministic_bounds_check(const LaxOleinikResult& at_t, const LaxOleinikResult& at_s,
                                                  const InitialCondition& phi0, const EigenSpectrum& spectrum,
                                                  double t, double s, const TruncatedPoint& x, double tol) {
    if (!(t > 0.0) || s < t) return unexpected(ErrorCode::InvalidArgument, "requires 0 < t <= s");
    if (!spectrum.supports(x.size())) {
        return unexpected(ErrorCode::InvalidArgument, "point level exceeds the spectrum capacity");
    }
    BoundsReport rep;
    rep.tolerance = tol;
    rep.monotonicity_margin = at_t.psi - at_s.psi;
    const std::vector<double> origin(x.size(), 0.0);
    const double stay = ic_value(phi0, x.coords);
    const double jump = inverse_metric(spectrum, x.coords) / (2.0 * t) + ic_value(phi0, origin);
    rep.upper_bound_margin = std::min(stay, jump) - at_t.psi;
    rep.passed = rep.monotonicity_margin >= -tol && rep.upper_bound_margin >= -tol;
    if (rep.monotonicity_margin < -tol) rep.message = "psi increased in time";
    if (rep.upper_bound_margin < -tol) {
        rep.message += rep.message.empty() ? "" : "; ";
        rep.message += "psi exceeds min(phi0(x), <A^-1 x,x>/(2t) + phi0(0))";
    }
    return rep;
}

Expected<double> counterexample_growth(double alpha, double beta, double t, const TruncatedPoint& x, std::size_t N) {
    if (!(alpha > 2.0 * beta) || !(2.0 * beta > 1.0)) {
        return unexpected(ErrorCode::InvalidArgument, "growth counterexample requires alpha > 2 beta > 1");
    }
    if (!(t > 0.0)) return unexpected(ErrorCode::InvalidArgument, "t must be positive");
    const auto xs = [&](std::size_t k) { return std::pow(static_cast<double>(k + 1), -beta); };
    const auto lam = [&](std::size_t k) { return std::pow(static_cast<double>(k + 1), alpha); };
    const auto xk = [&](std::size_t k) { return k < x.size() ? x[k] : 0.0; };

    double inner = 0.0;
    for (std::size_t k = 0; k < N; ++k) inner += xs(k) * xk(k);
    const double zN = -inner / xs(N);
    // phi0(z) = <z, x*>^2 = 0 by construction; only the metric term remains.
    double metric = (xk(N) - zN) * (xk(N) - zN) / lam(N);
    for (std::size_t k = N + 1; k < x.size(); ++k) metric += x[k] * x[k] / lam(k);
    return metric / (2.0 * t);
}

double nonconvex_profile_value(std::span<const double> y) {
    double r2 = 0.0;
    for (double v : y) r2 += v * v;
    return r2 >= 1.0 ? r2 : 2.0 - r2;
}

Expected<double> counterexample_nonconvex(const EigenSpectrum& spectrum, double t, std::size_t n_probe) {
    if (!(t > 0.0)) return unexpected(ErrorCode::InvalidArgument, "t must be positive");
    if (!spectrum.supports(n_probe + 1)) {
        return unexpected(ErrorCode::InvalidArgument, "n_probe exceeds the spectrum capacity");
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> e;
    for (std::size_t n = 0; n <= n_probe; ++n) {
        e.assign(n + 1, 0.0);
        e[n] = 1.0;
        best = std::min(best, nonconvex_profile_value(e) + 1.0 / (2.0 * t * spectrum.eigenvalue(n)));
    }
    return best;
}

}  // namespace hjb
