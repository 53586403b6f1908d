#include "hjblab/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hjb {

double QuadraticData::mu0_at(std::size_t i) const noexcept {
    if (const auto* c = std::get_if<ConstantRule>(&mu0)) return c->value;
    const auto& l = std::get<ListRule>(mu0);
    return i < l.values.size() ? l.values[i] : 0.0;
}

double QuadraticData::sup_abs() const noexcept {
    if (const auto* c = std::get_if<ConstantRule>(&mu0)) return std::fabs(c->value);
    double s = 0.0;
    for (double v : std::get<ListRule>(mu0).values) s = std::max(s, std::fabs(v));
    return s;
}

double QuadraticData::sup() const noexcept {
    if (const auto* c = std::get_if<ConstantRule>(&mu0)) return c->value;
    double s = 0.0;  // unlisted modes are zero
    for (double v : std::get<ListRule>(mu0).values) s = std::max(s, v);
    return s;
}

std::optional<std::size_t> QuadraticData::support() const noexcept {
    if (std::holds_alternative<ConstantRule>(mu0)) return std::nullopt;
    return std::get<ListRule>(mu0).values.size();
}

bool QuadraticData::admissible() const noexcept {
    if (const auto* c = std::get_if<ConstantRule>(&mu0)) return c->value >= 0.0;
    const auto& v = std::get<ListRule>(mu0).values;
    return std::all_of(v.begin(), v.end(), [](double m) { return m >= 0.0; });
}

Expected<QuadraticData> make_quadratic_data(std::variant<ConstantRule, ListRule> mu0) {
    QuadraticData d{std::move(mu0)};
    if (const auto* c = std::get_if<ConstantRule>(&d.mu0)) {
        if (!std::isfinite(c->value)) return unexpected(ErrorCode::InvalidArgument, "mu0 must be finite");
    } else {
        for (double v : std::get<ListRule>(d.mu0).values) {
            if (!std::isfinite(v)) return unexpected(ErrorCode::InvalidArgument, "mu0 entries must be finite");
        }
    }
    return d;
}

std::optional<std::size_t> QuadraticSolution::mode_count() const noexcept {
    std::optional<std::size_t> n;
    if (level) n = *level + 1;
    if (const auto cap = spectrum.capacity()) n = n ? std::min(*n, *cap) : *cap;
    return n;
}

Expected<QuadraticSolution> make_quadratic_solution(EigenSpectrum spectrum, QuadraticData data,
                                                    std::optional<std::size_t> level) {
    if (level && !spectrum.supports(*level + 1)) {
        return unexpected(ErrorCode::InvalidArgument, "truncation level exceeds the spectrum capacity");
    }
    return QuadraticSolution{std::move(spectrum), std::move(data), level};
}

std::optional<double> blowup_time(double mu0, double lambda) {
    if (mu0 >= 0.0) return std::nullopt;
    return -1.0 / (lambda * mu0);
}

Expected<double> riccati_mu(double mu0, double lambda, double t) {
    if (!(lambda > 0.0)) return unexpected(ErrorCode::InvalidArgument, "eigenvalue must be positive");
    if (t < 0.0) return unexpected(ErrorCode::InvalidArgument, "time must be non-negative");
    if (const auto tb = blowup_time(mu0, lambda); tb && t >= *tb) {
        Error e{ErrorCode::BlowUp, "Riccati flow explodes before the requested time", *tb};
        return unexpected(std::move(e));
    }
    return mu0 / (1.0 + lambda * mu0 * t);
}

namespace {

// Compensated (Neumaier) running sum.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x)) {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    [[nodiscard]] double value() const { return sum + carry; }
};

// Integral over [n, inf) of log(1 + a x^alpha) / x^alpha, valid for
// a n^alpha >= 2. Integration by parts leaves int 1/(1 + a x^alpha), which
// is expanded as an alternating series in q = 1/(a n^alpha).
double log_majorant_integral(double a, double alpha, double n) {
    const double am1 = alpha - 1.0;
    const double na = std::pow(n, alpha);
    const double q = 1.0 / (a * na);
    double s = 0.0;
    double qk = 1.0;
    for (int k = 0; k < 400; ++k) {
        const double term = qk / (alpha * (k + 1) - 1.0);
        s += (k % 2 == 0) ? term : -term;
        if (term <= 1e-18 * std::fabs(s)) break;
        qk *= q;
    }
    const double npow = std::pow(n, -am1);
    return npow * std::log1p(a * na) / am1 + alpha * npow * s / am1;
}

Unexpected blowup_error(double t_star) {
    Error e{ErrorCode::BlowUp, "log(1 + lambda mu0 t) undefined: Riccati flow has exploded", t_star};
    return unexpected(std::move(e));
}

}  // namespace

Expected<CertifiedSum> log_series(const EigenSpectrum& spectrum, const QuadraticData& rule, double t,
                                  std::optional<std::size_t> n_modes, double tol) {
    if (!(t >= 0.0) || !std::isfinite(t)) return unexpected(ErrorCode::InvalidArgument, "time must be finite and >= 0");
    if (!(tol > 0.0)) return unexpected(ErrorCode::InvalidArgument, "tolerance must be positive");

    std::optional<std::size_t> count = n_modes;
    if (const auto cap = spectrum.capacity()) count = count ? std::min(*count, *cap) : *cap;
    if (const auto sup = rule.support()) count = count ? std::min(*count, *sup) : *sup;

    CertifiedSum out;
    if (t == 0.0) return out;

    if (count) {
        CompensatedSum acc;
        std::optional<double> first_blowup;
        for (std::size_t i = 0; i < *count; ++i) {
            const double lambda = spectrum.eigenvalue(i);
            const double arg = lambda * rule.mu0_at(i) * t;
            if (arg <= -1.0) {
                const double tb = *blowup_time(rule.mu0_at(i), lambda);
                first_blowup = first_blowup ? std::min(*first_blowup, tb) : tb;
                continue;
            }
            acc.add(std::log1p(arg) / lambda);
        }
        if (first_blowup) return blowup_error(*first_blowup);
        out.value = acc.value();
        out.terms = *count;
        out.error_bound = 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(out.value);
        return out;
    }

    // Power-law spectrum with a constant curvature rule over infinitely many modes.
    const double mu0 = std::get<ConstantRule>(rule.mu0).value;
    if (mu0 == 0.0) return out;
    // Blow-up times -1/(lambda_i mu0) accumulate at zero.
    if (mu0 < 0.0) return blowup_error(0.0);

    const double a = mu0 * t;
    const double alpha = spectrum.alpha();
    constexpr std::size_t kMaxTerms = std::size_t{1} << 27;
    CompensatedSum acc;
    for (std::size_t n = 1; n <= kMaxTerms; ++n) {
        const double lambda = std::pow(static_cast<double>(n), alpha);
        acc.add(std::log1p(lambda * a) / lambda);
        const double nd = static_cast<double>(n);
        if (a * lambda < 2.0 || (n > 64 && n % 64 != 0)) continue;
        const double upper = log_majorant_integral(a, alpha, nd);
        const double lower = log_majorant_integral(a, alpha, nd + 1.0);
        const double partial = acc.value();
        const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * (partial + upper);
        const double half_width = 0.5 * (upper - lower) + rounding;
        if (half_width <= tol) {
            out.value = partial + 0.5 * (upper + lower);
            out.error_bound = half_width;
            out.terms = n;
            return out;
        }
    }
    return unexpected(ErrorCode::TailNotCertifiable, "series tail could not be certified within the term budget");
}

Expected<CertifiedSum> c_of_t(const QuadraticSolution& solution, double t, double tol) {
    return log_series(solution.spectrum, solution.data, t, solution.mode_count(), tol);
}

Expected<CertifiedSum> c_dot(const QuadraticSolution& solution, double t, double tol) {
    if (!(t >= 0.0) || !std::isfinite(t)) return unexpected(ErrorCode::InvalidArgument, "time must be finite and >= 0");
    if (!(tol > 0.0)) return unexpected(ErrorCode::InvalidArgument, "tolerance must be positive");
    const auto& spectrum = solution.spectrum;
    const auto& rule = solution.data;
    std::optional<std::size_t> count = solution.mode_count();
    if (const auto sup = rule.support()) count = count ? std::min(*count, *sup) : *sup;

    CertifiedSum out;
    if (count) {
        CompensatedSum acc;
        for (std::size_t i = 0; i < *count; ++i) {
            auto m = riccati_mu(rule.mu0_at(i), spectrum.eigenvalue(i), t);
            if (!m) return unexpected(m.error());
            acc.add(*m);
        }
        out.value = acc.value();
        out.terms = *count;
        out.error_bound = 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(out.value);
        return out;
    }

    const double mu0 = std::get<ConstantRule>(rule.mu0).value;
    if (mu0 == 0.0) return out;
    if (mu0 < 0.0) return blowup_error(0.0);
    if (t == 0.0) return unexpected(ErrorCode::TailNotCertifiable, "sum of mu0 over infinitely many modes diverges");
    const double alpha = spectrum.alpha();
    const double am1 = alpha - 1.0;
    constexpr std::size_t kMaxTerms = std::size_t{1} << 27;
    CompensatedSum acc;
    for (std::size_t n = 1; n <= kMaxTerms; ++n) {
        const double lambda = std::pow(static_cast<double>(n), alpha);
        acc.add(mu0 / (1.0 + lambda * mu0 * t));
        if (n > 64 && n % 64 != 0) continue;
        const double nd = static_cast<double>(n);
        const double upper = std::pow(nd, -am1) / (am1 * t);
        const double lower = std::max(0.0, std::pow(nd + 1.0, -am1) / (am1 * t) -
                                               std::pow(nd + 1.0, 1.0 - 2.0 * alpha) / ((2.0 * alpha - 1.0) * mu0 * t * t));
        const double partial = acc.value();
        const double half_width =
            0.5 * (upper - lower) + 8.0 * std::numeric_limits<double>::epsilon() * (partial + upper);
        if (half_width <= tol) {
            out.value = partial + 0.5 * (upper + lower);
            out.error_bound = half_width;
            out.terms = n;
            return out;
        }
    }
    return unexpected(ErrorCode::TailNotCertifiable, "series tail could not be certified within the term budget");
}

Expected<double> quadratic_time_derivative(const QuadraticSolution& solution, double t, const TruncatedPoint& x) {
    auto mu = riccati_curvatures(solution, t, x.size());
    if (!mu) return unexpected(mu.error());
    auto cd = c_dot(solution, t, solution.c_tolerance);
    if (!cd) return unexpected(cd.error());
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double m = (*mu)[i];
        q += solution.spectrum.eigenvalue(i) * m * m * x[i] * x[i];
    }
    return cd->value - 0.5 * q;
}

Expected<std::vector<double>> riccati_curvatures(const QuadraticSolution& solution, double t, std::size_t n) {
    const auto modes = solution.mode_count();
    if (!solution.spectrum.supports(n)) {
        return unexpected(ErrorCode::InvalidArgument, "point level exceeds the spectrum capacity");
    }
    std::vector<double> mu(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (modes && i >= *modes) break;
        auto m = riccati_mu(solution.data.mu0_at(i), solution.spectrum.eigenvalue(i), t);
        if (!m) return unexpected(m.error());
        mu[i] = *m;
    }
    return mu;
}

Expected<ScalarOrVector> eval_quadratic(const QuadraticSolution& solution, double t, const TruncatedPoint& x,
                                        EvalMode mode) {
    if (t < 0.0) return unexpected(ErrorCode::InvalidArgument, "time must be non-negative");
    auto mu = riccati_curvatures(solution, t, x.size());
    if (!mu) return unexpected(mu.error());
    switch (mode) {
        case EvalMode::Value: {
            auto c = c_of_t(solution, t, solution.c_tolerance);
            if (!c) return unexpected(c.error());
            double q = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) q += (*mu)[i] * x[i] * x[i];
            return ScalarOrVector{c->value + 0.5 * q};
        }
        case EvalMode::Gradient: {
            std::vector<double> g(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) g[i] = (*mu)[i] * x[i];
            return ScalarOrVector{std::move(g)};
        }
        case EvalMode::HessianDiagonal:
            return ScalarOrVector{std::move(mu).value()};
    }
    return unexpected(ErrorCode::InvalidArgument, "unknown evaluation mode");
}

Expected<RiccatiCrosscheck> riccati_ode_crosscheck(double mu0, double lambda, double t, std::size_t steps) {
    if (steps < 10) return unexpected(ErrorCode::InvalidArgument, "at least 10 RK4 steps are required");
    auto closed = riccati_mu(mu0, lambda, t);
    if (!closed) return unexpected(closed.error());
    const auto rhs = [lambda](double m) { return -lambda * m * m; };
    const double h = t / static_cast<double>(steps);
    double m = mu0;
    for (std::size_t s = 0; s < steps; ++s) {
        const double k1 = rhs(m);
        const double k2 = rhs(m + 0.5 * h * k1);
        const double k3 = rhs(m + 0.5 * h * k2);
        const double k4 = rhs(m + h * k3);
        m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return RiccatiCrosscheck{*closed, m, std::fabs(*closed - m)};
}

}  // namespace hjb
