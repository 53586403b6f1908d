#include "hjblab/initial_condition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace hjb {

Profile1D::Profile1D(std::string name, Fn value, Fn derivative, Fn second_derivative, bool convex,
                     double infimum, double curvature_sup)
    : name_(std::move(name)),
      value_(std::move(value)),
      derivative_(std::move(derivative)),
      second_(std::move(second_derivative)),
      convex_(convex),
      infimum_(infimum),
      curvature_sup_(curvature_sup) {}

Profile1D Profile1D::quadratic(double mu) {
    const double inf = mu >= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return Profile1D(
        "quadratic(mu=" + std::to_string(mu) + ")", [mu](double y) { return 0.5 * mu * y * y; },
        [mu](double y) { return mu * y; }, [mu](double) { return mu; }, mu >= 0.0, inf, std::fabs(mu));
}

Profile1D Profile1D::smooth_abs(double eps, double scale) {
    return Profile1D(
        "smooth_abs(eps=" + std::to_string(eps) + ",scale=" + std::to_string(scale) + ")",
        [eps, scale](double y) { return scale * std::hypot(y, eps); },
        [eps, scale](double y) { return scale * y / std::hypot(y, eps); },
        [eps, scale](double y) {
            const double r = std::hypot(y, eps);
            return scale * eps * eps / (r * r * r);
        },
        scale >= 0.0, scale * eps, std::fabs(scale) / eps);
}

Profile1D Profile1D::log_cosh(double k) {
    // log cosh(z) = |z| + log1p(exp(-2|z|)) - log 2, overflow-free.
    return Profile1D(
        "log_cosh(k=" + std::to_string(k) + ")",
        [k](double y) {
            const double z = std::fabs(k * y);
            return (z + std::log1p(std::exp(-2.0 * z)) - std::numbers::ln2) / k;
        },
        [k](double y) { return std::tanh(k * y); },
        [k](double y) {
            const double c = std::cosh(k * y);
            return std::isfinite(c) ? k / (c * c) : 0.0;
        },
        true, 0.0, k);
}

Profile1D Profile1D::constant(double c) {
    return Profile1D(
        "constant(" + std::to_string(c) + ")", [c](double) { return c; }, [](double) { return 0.0; },
        [](double) { return 0.0; }, true, c, 0.0);
}

Profile1D Profile1D::shifted(double offset) const {
    Profile1D out = *this;
    out.offset_ += offset;
    return out;
}

double ic_value(const InitialCondition& ic, std::span<const double> x) {
    if (const auto* q = std::get_if<DiagonalQuadratic>(&ic)) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += q->data.mu0_at(i) * x[i] * x[i];
        return 0.5 * s;
    }
    if (const auto* s = std::get_if<Separable>(&ic)) {
        // Profiles beyond the point's level are evaluated at the projected coordinate 0.
        double v = 0.0;
        for (std::size_t i = 0; i < s->profiles.size(); ++i) {
            v += s->profiles[i].value(i < x.size() ? x[i] : 0.0);
        }
        return v;
    }
    return std::get<GenericConvex>(ic).value(x);
}

void ic_gradient(const InitialCondition& ic, std::span<const double> x, std::span<double> out) {
    if (const auto* q = std::get_if<DiagonalQuadratic>(&ic)) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = q->data.mu0_at(i) * x[i];
        return;
    }
    if (const auto* s = std::get_if<Separable>(&ic)) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            out[i] = i < s->profiles.size() ? s->profiles[i].derivative(x[i]) : 0.0;
        }
        return;
    }
    std::get<GenericConvex>(ic).gradient(x, out);
}

bool ic_is_convex(const InitialCondition& ic) {
    if (const auto* q = std::get_if<DiagonalQuadratic>(&ic)) return q->data.admissible();
    if (const auto* s = std::get_if<Separable>(&ic)) {
        return std::all_of(s->profiles.begin(), s->profiles.end(), [](const Profile1D& p) { return p.convex(); });
    }
    return std::get<GenericConvex>(ic).convex;
}

double ic_infimum(const InitialCondition& ic) {
    if (const auto* q = std::get_if<DiagonalQuadratic>(&ic)) {
        return q->data.admissible() ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    if (const auto* s = std::get_if<Separable>(&ic)) {
        double v = 0.0;
        for (const auto& p : s->profiles) v += p.infimum();
        return v;
    }
    return std::get<GenericConvex>(ic).lower_bound;
}

std::vector<std::optional<double>> ic_curvature_bounds(const InitialCondition& ic, std::size_t n) {
    std::vector<std::optional<double>> out(n);
    if (const auto* q = std::get_if<DiagonalQuadratic>(&ic)) {
        for (std::size_t i = 0; i < n; ++i) out[i] = q->data.mu0_at(i);
    } else if (const auto* s = std::get_if<Separable>(&ic)) {
        for (std::size_t i = 0; i < n; ++i) out[i] = i < s->profiles.size() ? s->profiles[i].curvature_sup() : 0.0;
    } else {
        const auto& g = std::get<GenericConvex>(ic);
        for (std::size_t i = 0; i < n; ++i) out[i] = g.lipschitz_gradient;
    }
    return out;
}

std::optional<double> ic_c11_constant(const InitialCondition& ic, std::size_t n) {
    if (const auto* q = std::get_if<DiagonalQuadratic>(&ic)) {
        if (const auto sup = q->data.support()) {
            double s = 0.0;
            for (std::size_t i = 0; i < std::min(n, *sup); ++i) s = std::max(s, std::fabs(q->data.mu0_at(i)));
            return s;
        }
        return q->data.sup_abs();
    }
    if (const auto* s = std::get_if<Separable>(&ic)) {
        double c = 0.0;
        for (std::size_t i = 0; i < std::min(n, s->profiles.size()); ++i) {
            c = std::max(c, s->profiles[i].curvature_sup());
        }
        return c;
    }
    return std::get<GenericConvex>(ic).lipschitz_gradient;
}

std::string ic_describe(const InitialCondition& ic) {
    std::ostringstream os;
    if (const auto* q = std::get_if<DiagonalQuadratic>(&ic)) {
        if (const auto* c = std::get_if<ConstantRule>(&q->data.mu0)) {
            os << "diagonal_quadratic(mu0=" << c->value << ")";
        } else {
            os << "diagonal_quadratic(" << std::get<ListRule>(q->data.mu0).values.size() << " modes)";
        }
    } else if (const auto* s = std::get_if<Separable>(&ic)) {
        os << "separable[";
        for (std::size_t i = 0; i < s->profiles.size(); ++i) {
            if (i) os << ",";
            os << s->profiles[i].name();
            if (s->profiles[i].offset() != 0.0) os << "+" << s->profiles[i].offset();
        }
        os << "]";
    } else {
        os << "generic_convex";
    }
    return os.str();
}

ProbeReport probe_convexity(const InitialCondition& ic, std::size_t dim, double radius, std::size_t pairs,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-radius, radius);
    std::vector<double> a(dim), b(dim), m(dim);
    ProbeReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pairs; ++k) {
        for (std::size_t i = 0; i < dim; ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
            m[i] = 0.5 * (a[i] + b[i]);
        }
        const double margin = 0.5 * (ic_value(ic, a) + ic_value(ic, b)) + 1e-10 - ic_value(ic, m);
        rep.worst_margin = std::min(rep.worst_margin, margin);
        ++rep.probes;
    }
    rep.passed = rep.worst_margin >= 0.0;
    return rep;
}

ProbeReport probe_coercivity(const InitialCondition& ic, std::size_t dim, std::size_t rays, double threshold,
                             double max_radius, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::vector<double> origin(dim, 0.0);
    const double base = ic_value(ic, origin);
    std::vector<double> dir(dim), p(dim);
    ProbeReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rays; ++k) {
        double norm = 0.0;
        for (auto& d : dir) {
            d = g(rng);
            norm += d * d;
        }
        norm = std::sqrt(norm);
        double best = -std::numeric_limits<double>::infinity();
        for (double r = 1.0; r <= max_radius; r *= 2.0) {
            for (std::size_t i = 0; i < dim; ++i) p[i] = r * dir[i] / norm;
            best = std::max(best, ic_value(ic, p) - base - threshold);
            if (best > 0.0) break;
        }
        rep.worst_margin = std::min(rep.worst_margin, best);
        ++rep.probes;
    }
    rep.passed = rep.worst_margin > 0.0;
    return rep;
}

}  // namespace hjb
