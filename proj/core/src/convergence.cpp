#include "hjblab/convergence.hpp"

#include <cmath>

#include "hjblab/exact_sum.hpp"

namespace hjb {

double point_coordinate(const PointRule& rule, std::size_t i) {
    if (const auto* p = std::get_if<InversePowerPoint>(&rule)) {
        return p->scale * std::pow(static_cast<double>(i + 1), -p->power);
    }
    const auto& l = std::get<ListPoint>(rule).values;
    return i < l.size() ? l[i] : 0.0;
}

namespace {

Expected<double> level_value(const EigenSpectrum& spectrum, const QuadraticData& data, std::size_t level, double t,
                             const PointRule& x) {
    auto sol = make_quadratic_solution(spectrum, data, level);
    if (!sol) return unexpected(sol.error());
    std::vector<double> c(level + 1);
    for (std::size_t i = 0; i <= level; ++i) c[i] = point_coordinate(x, i);
    auto v = eval_quadratic(*sol, t, TruncatedPoint(std::move(c)), EvalMode::Value);
    if (!v) return unexpected(v.error());
    return std::get<double>(*v);
}

// (1/2t) sum_{i > level} x_i^2 / lambda_i, rounded up.
Expected<double> psi_tail(const EigenSpectrum& spectrum, std::size_t level, double t, const PointRule& x) {
    ExactSum acc;
    if (const auto* l = std::get_if<ListPoint>(&x)) {
        for (std::size_t i = level + 1; i < l->values.size(); ++i) {
            if (!spectrum.supports(i + 1)) break;
            acc.add(l->values[i] * l->values[i] / spectrum.eigenvalue(i));
        }
        return acc.value() / (2.0 * t) * (1.0 + 4e-16);
    }
    if (const auto cap = spectrum.capacity()) {
        for (std::size_t i = level + 1; i < *cap; ++i) {
            const double xi = point_coordinate(x, i);
            acc.add(xi * xi / spectrum.eigenvalue(i));
        }
        return acc.value() / (2.0 * t) * (1.0 + 4e-16);
    }
    // Terms scale^2 m^-s with m = i + 1; sum to M, then the integral majorant
    // of the decreasing remainder.
    const auto& p = std::get<InversePowerPoint>(x);
    const double s = 2.0 * p.power + spectrum.alpha();
    if (!(s > 1.0)) return unexpected(ErrorCode::TailNotCertifiable, "point tail is not summable");
    const std::size_t M = level + 4096;
    for (std::size_t i = level + 1; i < M; ++i) {
        const double xi = point_coordinate(x, i);
        acc.add(xi * xi / spectrum.eigenvalue(i));
    }
    const double m = static_cast<double>(M);
    acc.add(p.scale * p.scale * std::pow(m, 1.0 - s) / (s - 1.0));
    return acc.value() / (2.0 * t) * (1.0 + 1e-14);
}

}  // namespace

Expected<ConvergenceTable> galerkin_convergence(const EigenSpectrum& spectrum, const QuadraticData& data,
                                                const std::vector<std::size_t>& levels, double t,
                                                const PointRule& x, double tol) {
    if (levels.empty()) return unexpected(ErrorCode::InvalidArgument, "no levels given");
    if (!(t > 0.0)) return unexpected(ErrorCode::InvalidArgument, "time must be positive");
    if (!data.admissible()) return unexpected(ErrorCode::NonConvex, "negative curvature in the quadratic data");
    for (std::size_t k = 1; k < levels.size(); ++k) {
        if (levels[k] <= levels[k - 1]) return unexpected(ErrorCode::InvalidArgument, "levels must increase");
    }
    auto full = log_series(spectrum, data, t, std::nullopt, 1e-12);
    if (!full) return unexpected(full.error());

    ConvergenceTable table;
    for (std::size_t level : levels) {
        if (!spectrum.supports(2 * level + 1)) {
            return unexpected(ErrorCode::InvalidArgument, "level " + std::to_string(2 * level) + " exceeds the spectrum");
        }
        ConvergenceRow row;
        row.level = level;
        auto v = level_value(spectrum, data, level, t, x);
        if (!v) return unexpected(v.error());
        auto v2 = level_value(spectrum, data, 2 * level, t, x);
        if (!v2) return unexpected(v2.error());
        auto head = log_series(spectrum, data, t, level + 1, 1e-12);
        if (!head) return unexpected(head.error());
        auto pt = psi_tail(spectrum, level, t, x);
        if (!pt) return unexpected(pt.error());
        row.value = *v;
        row.cauchy_gap = std::fabs(*v2 - *v);
        row.c_tail = std::max(0.0, full->value - head->value) + full->error_bound + head->error_bound;
        row.psi_tail = *pt;
        row.tail_bound = row.c_tail + row.psi_tail;
        row.within = row.cauchy_gap <= row.tail_bound + tol;
        if (!table.rows.empty()) {
            const auto& prev = table.rows.back();
            table.gaps_non_increasing = table.gaps_non_increasing && row.cauchy_gap <= prev.cauchy_gap;
            table.tails_non_increasing = table.tails_non_increasing && row.tail_bound <= prev.tail_bound;
        }
        table.passed = table.passed && row.within;
        table.rows.push_back(row);
    }
    table.passed = table.passed && table.gaps_non_increasing && table.tails_non_increasing;
    return table;
}

}  // namespace hjb
