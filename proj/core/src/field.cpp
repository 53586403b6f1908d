#include "hjblab/field.hpp"

#include <cmath>

namespace hjb {

namespace {

Expected<void> check_grid_point(const GridBacked& g, const TruncatedPoint& x, double margin) {
    if (x.size() != g.grid->dim()) {
        return unexpected(ErrorCode::OutOfDomain, "grid field queried with the wrong number of coordinates");
    }
    if (!g.grid->contains(x.coords, margin)) {
        return unexpected(ErrorCode::OutOfDomain, "query too close to the grid edge for the requested derivative");
    }
    return {};
}

double grid_step(const GridBacked& g) { return g.h_fd.value_or(g.grid->spec().spacing(0)); }

}  // namespace

std::string SolutionField::kind_name() const {
    switch (repr_.index()) {
        case 0: return "closed_form_quadratic";
        case 1: return "separable_oracle";
        default: return "grid";
    }
}

std::optional<std::size_t> SolutionField::fixed_dim() const {
    if (const auto* g = std::get_if<GridBacked>(&repr_)) return g->grid->dim();
    return std::nullopt;
}

double SolutionField::eigenvalue(std::size_t i) const {
    if (const auto* q = std::get_if<ClosedFormQuadratic>(&repr_)) return q->solution.spectrum.eigenvalue(i);
    if (const auto* s = std::get_if<SeparableOracle>(&repr_)) return s->spectrum.eigenvalue(i);
    return std::get<GridBacked>(repr_).grid->eigenvalues().at(i);
}

Expected<double> SolutionField::value(double t, const TruncatedPoint& x) const {
    if (const auto* q = std::get_if<ClosedFormQuadratic>(&repr_)) {
        auto v = eval_quadratic(q->solution, t, x, EvalMode::Value);
        if (!v) return unexpected(v.error());
        return std::get<double>(*v);
    }
    if (const auto* s = std::get_if<SeparableOracle>(&repr_)) {
        if (t == 0.0) {
            double v = 0.0;
            for (std::size_t i = 0; i < s->profiles.size(); ++i) v += s->profiles[i].value(i < x.size() ? x[i] : 0.0);
            return v;
        }
        auto v = separable_eval(s->profiles, s->spectrum, t, x, EvalMode::Value, s->quad);
        if (!v) return unexpected(v.error());
        return std::get<double>(*v);
    }
    const auto& g = std::get<GridBacked>(repr_);
    if (auto ok = check_grid_point(g, x, 0.0); !ok) return unexpected(ok.error());
    return g.grid->value(t, x.coords);
}

Expected<std::vector<double>> SolutionField::gradient(double t, const TruncatedPoint& x) const {
    if (const auto* q = std::get_if<ClosedFormQuadratic>(&repr_)) {
        auto v = eval_quadratic(q->solution, t, x, EvalMode::Gradient);
        if (!v) return unexpected(v.error());
        return std::get<std::vector<double>>(std::move(*v));
    }
    if (const auto* s = std::get_if<SeparableOracle>(&repr_)) {
        auto v = separable_eval(s->profiles, s->spectrum, t, x, EvalMode::Gradient, s->quad);
        if (!v) return unexpected(v.error());
        return std::get<std::vector<double>>(std::move(*v));
    }
    const auto& g = std::get<GridBacked>(repr_);
    const double h = grid_step(g);
    if (auto ok = check_grid_point(g, x, h); !ok) return unexpected(ok.error());
    std::vector<double> out(x.size());
    TruncatedPoint p = x;
    for (std::size_t a = 0; a < x.size(); ++a) {
        p[a] = x[a] + h;
        auto vp = g.grid->value(t, p.coords);
        p[a] = x[a] - h;
        auto vm = g.grid->value(t, p.coords);
        p[a] = x[a];
        if (!vp) return unexpected(vp.error());
        if (!vm) return unexpected(vm.error());
        out[a] = (*vp - *vm) / (2.0 * h);
    }
    return out;
}

Expected<double> SolutionField::hessian_entry(double t, const TruncatedPoint& x, std::size_t i,
                                              std::size_t j) const {
    if (i >= x.size() || j >= x.size()) return unexpected(ErrorCode::InvalidArgument, "hessian index out of range");
    if (const auto* q = std::get_if<ClosedFormQuadratic>(&repr_)) {
        if (i != j) return 0.0;
        auto mu = riccati_curvatures(q->solution, t, x.size());
        if (!mu) return unexpected(mu.error());
        return (*mu)[i];
    }
    if (const auto* s = std::get_if<SeparableOracle>(&repr_)) {
        if (i != j) return 0.0;
        if (i >= s->profiles.size()) return 0.0;
        auto p = cole_hopf_point(s->profiles[i], s->spectrum.eigenvalue(i), t, x[i], s->quad);
        if (!p) return unexpected(p.error());
        return p->dxx;
    }
    const auto& g = std::get<GridBacked>(repr_);
    const double h = grid_step(g);
    if (auto ok = check_grid_point(g, x, h); !ok) return unexpected(ok.error());
    const auto at = [&](double di, double dj) -> Expected<double> {
        TruncatedPoint p = x;
        p[i] += di;
        p[j] += dj;
        return g.grid->value(t, p.coords);
    };
    if (i == j) {
        auto a = at(h, 0.0), b = at(0.0, 0.0), c = at(-h, 0.0);
        if (!a) return a;
        if (!b) return b;
        if (!c) return c;
        return (*a - 2.0 * *b + *c) / (h * h);
    }
    auto pp = at(h, h), pm = at(h, -h), mp = at(-h, h), mm = at(-h, -h);
    for (const auto* e : {&pp, &pm, &mp, &mm}) {
        if (!*e) return unexpected(e->error());
    }
    return (*pp - *pm - *mp + *mm) / (4.0 * h * h);
}

Expected<double> SolutionField::time_derivative(double t, const TruncatedPoint& x) const {
    if (const auto* q = std::get_if<ClosedFormQuadratic>(&repr_)) return quadratic_time_derivative(q->solution, t, x);
    if (const auto* s = std::get_if<SeparableOracle>(&repr_)) {
        if (!s->spectrum.supports(x.size())) {
            return unexpected(ErrorCode::InvalidArgument, "point level exceeds the spectrum capacity");
        }
        double d = 0.0;
        for (std::size_t i = 0; i < std::min(x.size(), s->profiles.size()); ++i) {
            auto p = cole_hopf_point(s->profiles[i], s->spectrum.eigenvalue(i), t, x[i], s->quad);
            if (!p) return unexpected(p.error());
            d += p->dt;
        }
        return d;
    }
    const auto& g = std::get<GridBacked>(repr_);
    if (auto ok = check_grid_point(g, x, 0.0); !ok) return unexpected(ok.error());
    return g.grid->time_derivative(t, x.coords);
}

Expected<ScalarOrVector> SolutionField::query(double t, const TruncatedPoint& x, const FieldQuery& q) const {
    const auto wrap = [](auto r) -> Expected<ScalarOrVector> {
        if (!r) return unexpected(r.error());
        return ScalarOrVector{std::move(r).value()};
    };
    switch (q.kind) {
        case QueryKind::Value: return wrap(value(t, x));
        case QueryKind::Gradient: return wrap(gradient(t, x));
        case QueryKind::HessianEntry: return wrap(hessian_entry(t, x, q.i, q.j));
        case QueryKind::TimeDerivative: return wrap(time_derivative(t, x));
    }
    return unexpected(ErrorCode::InvalidArgument, "unknown query kind");
}

}  // namespace hjb
