#include "hjblab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hjblab/parallel.hpp"

namespace hjb {

namespace {

struct Candidate {
    double margin = std::numeric_limits<double>::infinity();
    std::string label;
};

// Runs `eval` on every sample concurrently and keeps the smallest margin,
// reducing in index order so the result is independent of the worker count.
template <typename Eval>
Expected<EstimateReport> reduce_samples(std::string name, const SampleSet& samples, double tol, Eval eval) {
    std::vector<std::optional<Expected<Candidate>>> out(samples.points.size());
    parallel_for(samples.points.size(), [&](std::size_t k) { out[k] = eval(samples.points[k]); });
    EstimateReport rep;
    rep.name = std::move(name);
    rep.samples = samples.description;
    rep.tolerance = tol;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto& r = *out[k];
        if (!r) return unexpected(r.error());
        ++rep.evaluated;
        if (r->margin < rep.worst_margin) {
            rep.worst_margin = r->margin;
            rep.worst_t = samples.points[k].t;
            rep.worst_x = samples.points[k].x.coords;
            rep.worst_direction = r->label;
        }
    }
    rep.passed = rep.worst_margin >= -tol;
    return rep;
}

void take(Candidate& c, double margin, const std::string& label) {
    if (margin < c.margin) {
        c.margin = margin;
        c.label = label;
    }
}

std::size_t active_modes(const SolutionField& field, const TruncatedPoint& x) {
    return field.fixed_dim().value_or(x.size());
}

// A negative phi0_ii marks an unknown bound.
double decay_bound(double phi0_ii, double lambda, double t) {
    if (phi0_ii < 0.0) return 1.0 / (lambda * t);
    return phi0_ii / (1.0 + lambda * phi0_ii * t);
}

double bound_or_unknown(const std::vector<std::optional<double>>& sup, std::size_t i) {
    return i < sup.size() ? sup[i].value_or(-1.0) : -1.0;
}

}  // namespace

std::optional<double> EstimateReport::metric(const std::string& key) const {
    for (const auto& [k, v] : metrics) {
        if (k == key) return v;
    }
    return std::nullopt;
}

namespace {

nlohmann::json report_json(const EstimateReport& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["samples"] = r.samples;
    j["worst_margin"] = r.worst_margin;
    j["worst_location"] = {{"t", r.worst_t}, {"x", r.worst_x}, {"direction", r.worst_direction}};
    j["tolerance"] = r.tolerance;
    j["evaluated"] = r.evaluated;
    j["passed"] = r.passed;
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : r.metrics) m[k] = v;
    j["metrics"] = m;
    return j;
}

}  // namespace

std::string report_to_json(const EstimateReport& report) { return report_json(report).dump(2); }

std::string reports_to_json(const std::vector<EstimateReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(report_json(r));
    return arr.dump(2);
}

std::string reports_to_table(const std::vector<EstimateReport>& reports) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-34s %6s %14s %10s %9s  %s\n", "estimate", "status", "worst_margin", "tol",
                  "samples", "worst_at");
    os << line;
    for (const auto& r : reports) {
        std::ostringstream where;
        where << "t=" << r.worst_t;
        if (!r.worst_direction.empty()) where << " " << r.worst_direction;
        std::snprintf(line, sizeof line, "%-34s %6s %14.6e %10.2e %9zu  %s\n", r.name.c_str(),
                      r.passed ? "PASS" : "FAIL", r.worst_margin, r.tolerance, r.evaluated, where.str().c_str());
        os << line;
    }
    return os.str();
}

Expected<CertifiedSum> omega(const Modulus& modulus, double t, double tol) {
    if (modulus.C < 0.0) return unexpected(ErrorCode::InvalidArgument, "modulus constant C must be >= 0");
    const QuadraticData rule{ConstantRule{modulus.C}};
    return log_series(modulus.spectrum, rule, t, modulus.modes, tol);
}

Expected<EstimateReport> check_second_derivative_decay(const SolutionField& field,
                                                       const std::vector<std::optional<double>>& phi0_ii_sup,
                                                       const SampleSet& samples, double tol) {
    return reduce_samples("second_derivative_decay", samples, tol, [&](const SamplePoint& s) -> Expected<Candidate> {
        Candidate c;
        const std::size_t n = std::min(active_modes(field, s.x), phi0_ii_sup.size());
        for (std::size_t i = 0; i < n; ++i) {
            auto h = field.hessian_entry(s.t, s.x, i, i);
            if (!h) return unexpected(h.error());
            take(c, decay_bound(bound_or_unknown(phi0_ii_sup, i), field.eigenvalue(i), s.t) - *h, "i=" + std::to_string(i));
        }
        return c;
    });
}

Expected<EstimateReport> check_hessian_metric_bound(const SolutionField& field, const SampleSet& samples,
                                                    const std::vector<std::vector<double>>& directions,
                                                    const std::vector<std::optional<double>>& phi0_ii_sup,
                                                    double tol, std::size_t pair_modes) {
    return reduce_samples("hessian_metric_bound", samples, tol, [&](const SamplePoint& s) -> Expected<Candidate> {
        Candidate c;
        const std::size_t n = active_modes(field, s.x);
        for (std::size_t k = 0; k < directions.size(); ++k) {
            const auto& xi = directions[k];
            const std::size_t m = std::min(n, xi.size());
            double quad = 0.0, bound = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (xi[i] == 0.0) continue;
                bound += xi[i] * xi[i] / field.eigenvalue(i);
                for (std::size_t j = 0; j < m; ++j) {
                    if (xi[j] == 0.0) continue;
                    auto h = field.hessian_entry(s.t, s.x, i, j);
                    if (!h) return unexpected(h.error());
                    quad += xi[i] * xi[j] * *h;
                }
            }
            take(c, bound / s.t - quad, "direction " + std::to_string(k));
        }
        const std::size_t pm = std::min(n, pair_modes);
        for (std::size_t i = 0; i < pm; ++i) {
            const double bi = decay_bound(bound_or_unknown(phi0_ii_sup, i), field.eigenvalue(i), s.t);
            for (std::size_t j = i + 1; j < pm; ++j) {
                const double bj = decay_bound(bound_or_unknown(phi0_ii_sup, j), field.eigenvalue(j), s.t);
                auto h = field.hessian_entry(s.t, s.x, i, j);
                if (!h) return unexpected(h.error());
                take(c, std::sqrt(bi * bj) - std::fabs(*h),
                     "pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
        return c;
    });
}

Expected<EstimateReport> check_gradient_bounds(const SolutionField& field, double phi0_inf, const SampleSet& samples,
                                               double tol) {
    return reduce_samples("gradient_bounds", samples, tol, [&](const SamplePoint& s) -> Expected<Candidate> {
        auto v = field.value(s.t, s.x);
        if (!v) return unexpected(v.error());
        auto g = field.gradient(s.t, s.x);
        if (!g) return unexpected(g.error());
        const double excess = std::max(0.0, *v - phi0_inf);
        Candidate c;
        double norm2 = 0.0, anorm = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i) {
            const double lambda = field.eigenvalue(i);
            const double gi = (*g)[i];
            norm2 += gi * gi;
            anorm += lambda * gi * gi;
            take(c, std::sqrt(2.0 * excess / (lambda * s.t)) - std::fabs(gi), "|phi_" + std::to_string(i) + "|");
        }
        take(c, std::sqrt(2.0 * excess / s.t) - std::sqrt(norm2), "|grad phi|");
        const double r = excess / s.t;
        take(c, 4.0 * r * r - anorm, "<A grad phi, grad phi>");
        return c;
    });
}

Expected<EstimateReport> check_sandwich(const SolutionField& field, const InitialCondition& phi0,
                                        const EigenSpectrum& spectrum, const Modulus& modulus,
                                        const SampleSet& samples, double tol) {
    std::vector<double> upper(samples.points.size(), -std::numeric_limits<double>::infinity());
    auto rep = reduce_samples("sandwich", samples, tol, [&](const SamplePoint& s) -> Expected<Candidate> {
        auto phi = field.value(s.t, s.x);
        if (!phi) return unexpected(phi.error());
        auto psi = deterministic_value(phi0, spectrum, s.t, s.x);
        if (!psi) return unexpected(psi.error());
        auto w = omega(modulus, s.t, 1e-12);
        if (!w) return unexpected(w.error());
        const double up = *psi + w->value - *phi;
        const std::size_t k = static_cast<std::size_t>(&s - samples.points.data());
        upper[k] = up;
        Candidate c;
        take(c, *phi - *psi, "lower (phi - psi)");
        take(c, up, "upper (psi + omega - phi)");
        return c;
    });
    if (!rep) return rep;
    rep->metrics.emplace_back("upper_margin_max", *std::max_element(upper.begin(), upper.end()));
    rep->metrics.emplace_back("upper_margin_min", *std::min_element(upper.begin(), upper.end()));
    return rep;
}

Expected<double> epsilon_tail(const EigenSpectrum& spectrum, std::size_t d) {
    if (const auto cap = spectrum.capacity()) {
        double s = 0.0;
        for (std::size_t i = d; i < *cap; ++i) s += 1.0 / spectrum.eigenvalue(i);
        return s;
    }
    // Direct sum to M, then Euler-Maclaurin for sum_{m > M} m^-alpha.
    const double a = spectrum.alpha();
    const std::size_t M = d + 2000;
    double s = 0.0;
    for (std::size_t i = M; i-- > d;) s += 1.0 / spectrum.eigenvalue(i);
    const double m = static_cast<double>(M + 1);  // first index left out, as m = i + 1
    const double tail = std::pow(m, 1.0 - a) / (a - 1.0) + 0.5 * std::pow(m, -a) + a * std::pow(m, -a - 1.0) / 12.0 -
                        a * (a + 1.0) * (a + 2.0) * std::pow(m, -a - 3.0) / 720.0;
    return s + tail;
}

Expected<ResidualStats> transformed_residual(const SolutionField& field, const EigenSpectrum& spectrum, std::size_t d,
                                             const SampleSet& samples, double tol) {
    auto eps = epsilon_tail(spectrum, d);
    if (!eps) return unexpected(eps.error());
    std::vector<std::optional<Expected<double>>> R(samples.points.size());
    parallel_for(samples.points.size(), [&](std::size_t k) {
        const auto& s = samples.points[k];
        if (d > s.x.size()) {
            R[k] = Expected<double>(unexpected(ErrorCode::InvalidArgument, "d exceeds the sample level"));
            return;
        }
        auto dt = field.time_derivative(s.t, s.x);
        auto g = field.gradient(s.t, s.x);
        if (!dt || !g) {
            R[k] = Expected<double>(unexpected(!dt ? dt.error() : g.error()));
            return;
        }
        double r = *dt;
        for (std::size_t i = 0; i < g->size(); ++i) r += 0.5 * spectrum.eigenvalue(i) * (*g)[i] * (*g)[i];
        for (std::size_t i = 0; i < d; ++i) {
            auto h = field.hessian_entry(s.t, s.x, i, i);
            if (!h) {
                R[k] = Expected<double>(unexpected(h.error()));
                return;
            }
            r -= *h;
        }
        R[k] = r;
    });
    ResidualStats st;
    st.epsilon_d = *eps;
    st.min = std::numeric_limits<double>::infinity();
    st.max = -std::numeric_limits<double>::infinity();
    st.worst_margin = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t k = 0; k < R.size(); ++k) {
        const auto& r = *R[k];
        if (!r) return unexpected(r.error());
        const double t = samples.points[k].t;
        st.min = std::min(st.min, *r);
        st.max = std::max(st.max, *r);
        sum += *r;
        st.worst_margin = std::min({st.worst_margin, *r + tol, *eps / t + tol - *r});
        ++st.evaluated;
    }
    st.mean = st.evaluated ? sum / static_cast<double>(st.evaluated) : 0.0;
    st.passed = st.worst_margin >= 0.0;
    return st;
}

Expected<GapReport> comparison_gap(const SolutionField& a, const SolutionField& b, double gamma, double T,
                                   const std::vector<double>& times, const std::vector<TruncatedPoint>& points,
                                   double tol) {
    std::vector<double> window;
    for (double t : times) {
        if (t >= gamma - 1e-14 && t <= T + 1e-14) window.push_back(t);
    }
    std::sort(window.begin(), window.end());
    if (window.empty() || points.empty()) return unexpected(ErrorCode::InvalidArgument, "empty comparison window");
    const std::size_t np = points.size();
    std::vector<std::optional<Expected<double>>> gaps(window.size() * np);
    parallel_for(gaps.size(), [&](std::size_t k) {
        const double t = window[k / np];
        const auto& x = points[k % np];
        auto va = a.value(t, x);
        auto vb = b.value(t, x);
        if (!va) gaps[k] = Expected<double>(unexpected(va.error()));
        else if (!vb) gaps[k] = Expected<double>(unexpected(vb.error()));
        else gaps[k] = std::fabs(*va - *vb);
    });
    GapReport rep;
    rep.tolerance = tol;
    rep.sup_gap = -1.0;
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        const auto& g = *gaps[k];
        if (!g) return unexpected(g.error());
        if (k < np) rep.gap_at_gamma = std::max(rep.gap_at_gamma, *g);
        if (*g > rep.sup_gap) {
            rep.sup_gap = *g;
            rep.worst_t = window[k / np];
            rep.worst_x = points[k % np].coords;
        }
    }
    rep.passed = rep.sup_gap <= rep.gap_at_gamma + tol;
    return rep;
}

Expected<EstimateReport> time_derivative_growth_check(const SolutionField& field, const SampleSet& samples,
                                                      double tol) {
    std::vector<double> ratio(samples.points.size(), 0.0);
    auto rep = reduce_samples("time_derivative_growth", samples, tol, [&](const SamplePoint& s) -> Expected<Candidate> {
        auto dt = field.time_derivative(s.t, s.x);
        if (!dt) return unexpected(dt.error());
        double bx = 0.0;
        for (std::size_t i = 0; i < s.x.size(); ++i) bx += s.x[i] * s.x[i] / field.eigenvalue(i);
        const double r = std::fabs(*dt) / (bx + 1.0);
        ratio[static_cast<std::size_t>(&s - samples.points.data())] = r;
        Candidate c;
        take(c, std::isfinite(r) ? 0.0 : -std::numeric_limits<double>::infinity(), "finite ratio");
        return c;
    });
    if (!rep) return rep;
    std::map<double, double> per_time;
    for (std::size_t k = 0; k < ratio.size(); ++k) {
        auto& m = per_time[samples.points[k].t];
        m = std::max(m, ratio[k]);
    }
    double prev = std::numeric_limits<double>::infinity();
    double prev_t = 0.0;
    for (const auto& [t, r] : per_time) {
        rep->metrics.emplace_back("ratio@" + std::to_string(t), r);
        const double margin = prev + tol - r;
        if (margin < rep->worst_margin) {
            rep->worst_margin = margin;
            rep->worst_t = t;
            rep->worst_x.clear();
            rep->worst_direction = "non-increasing after t=" + std::to_string(prev_t);
        }
        prev = r;
        prev_t = t;
    }
    rep->passed = rep->worst_margin >= -tol;
    return rep;
}

namespace {

// Per-axis oracle values u_a(t, x) at the given coordinates.
Expected<std::vector<double>> axis_oracle(const InitialCondition& phi0, std::size_t axis, double lambda, double t,
                                          const std::vector<double>& xs, const QuadratureConfig& quad) {
    std::vector<double> out(xs.size());
    if (const auto* q = std::get_if<DiagonalQuadratic>(&phi0)) {
        const double mu0 = q->data.mu0_at(axis);
        auto mu = riccati_mu(mu0, lambda, t);
        if (!mu) return unexpected(mu.error());
        const double c = std::log1p(lambda * mu0 * t) / lambda;
        for (std::size_t j = 0; j < xs.size(); ++j) out[j] = c + 0.5 * *mu * xs[j] * xs[j];
        return out;
    }
    const auto* sep = std::get_if<Separable>(&phi0);
    if (!sep) return unexpected(ErrorCode::InvalidArgument, "grid oracle needs diagonal quadratic or separable data");
    if (axis >= sep->profiles.size()) {
        std::fill(out.begin(), out.end(), 0.0);
        return out;
    }
    std::vector<std::optional<Expected<double>>> v(xs.size());
    parallel_for(xs.size(), [&](std::size_t j) { v[j] = cole_hopf_1d(sep->profiles[axis], lambda, t, xs[j], quad); });
    for (std::size_t j = 0; j < xs.size(); ++j) {
        if (!*v[j]) return unexpected(v[j]->error());
        out[j] = **v[j];
    }
    return out;
}

}  // namespace

Expected<OracleErrorReport> grid_oracle_error(const GridField& grid, const InitialCondition& phi0, double t_min,
                                              double window, const QuadratureConfig& quad) {
    const std::size_t dim = grid.dim();
    const auto& spec = grid.spec();
    // Frozen modes past the grid dimension add their value at 0.
    double frozen = 0.0;
    if (const auto* sep = std::get_if<Separable>(&phi0)) {
        for (std::size_t a = dim; a < sep->profiles.size(); ++a) frozen += sep->profiles[a].value(0.0);
    }
    std::vector<std::vector<std::size_t>> idx(dim);
    std::vector<std::vector<double>> xs(dim);
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t j = 0; j < spec.nodes[a]; ++j) {
            const double x = grid.coordinate(a, j);
            if (std::fabs(x) <= window + 1e-12) {
                idx[a].push_back(j);
                xs[a].push_back(x);
            }
        }
        if (idx[a].empty()) return unexpected(ErrorCode::InvalidArgument, "window contains no grid nodes");
    }
    OracleErrorReport rep;
    rep.sup_error = -1.0;
    for (std::size_t k = 0; k < grid.times().size(); ++k) {
        const double t = grid.times()[k];
        if (t < t_min - 1e-14 || t <= 0.0) continue;
        std::vector<std::vector<double>> oracle(dim);
        for (std::size_t a = 0; a < dim; ++a) {
            auto o = axis_oracle(phi0, a, grid.eigenvalues()[a], t, xs[a], quad);
            if (!o) return unexpected(o.error());
            oracle[a] = std::move(*o);
        }
        const auto& slice = grid.slice(k);
        std::size_t count = 1;
        for (std::size_t a = 0; a < dim; ++a) count *= idx[a].size();
        for (std::size_t m = 0; m < count; ++m) {
            std::size_t flat = 0, stride = 1, rem = m;
            double exact = frozen;
            std::vector<double> x(dim);
            for (std::size_t a = 0; a < dim; ++a) {
                const std::size_t p = rem % idx[a].size();
                rem /= idx[a].size();
                flat += idx[a][p] * stride;
                stride *= spec.nodes[a];
                exact += oracle[a][p];
                x[a] = xs[a][p];
            }
            const double err = std::fabs(slice[flat] - exact);
            ++rep.evaluated;
            if (err > rep.sup_error) {
                rep.sup_error = err;
                rep.worst_t = t;
                rep.worst_x = std::move(x);
            }
        }
    }
    if (rep.evaluated == 0) return unexpected(ErrorCode::InvalidArgument, "no stored time at or after t_min");
    return rep;
}

}  // namespace hjb
