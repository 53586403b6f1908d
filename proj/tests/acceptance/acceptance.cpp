// Acceptance gate: one PASS/FAIL line per criterion, exit status 0 iff all
// pass. Tolerances and runtime budgets are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hjblab/convergence.hpp"
#include "hjblab/deterministic.hpp"
#include "hjblab/field.hpp"
#include "hjblab/grid.hpp"
#include "hjblab/quadratic.hpp"
#include "hjblab/sampling.hpp"
#include "hjblab/storage.hpp"
#include "hjblab/verify.hpp"
#include "oracles.hpp"

using namespace hjb;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

char buf[512];

template <typename... A>
std::string format(const char* f, A... a) {
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

EigenSpectrum power(double a) { return make_spectrum(PowerLawSpec{a}).value(); }

std::vector<double> tenths() {
    std::vector<double> v;
    for (int k = 1; k <= 10; ++k) v.push_back(0.1 * k);
    return v;
}

// ---------------------------------------------------------------- 1

Outcome riccati_exactness() {
    double worst = 0.0;
    for (double lambda : {1.0, 4.0, 9.0, 100.0}) {
        for (double mu0 : {0.0, 0.5, 1.0, 5.0}) {
            for (double t : {0.01, 0.1, 1.0, 10.0}) {
                auto c = riccati_ode_crosscheck(mu0, lambda, t, 10000);
                if (!c) return {false, c.error().describe()};
                worst = std::max(worst, c->abs_error);
            }
        }
    }
    constexpr double tol = 1e-9;
    return {worst <= tol, format("max |closed - RK4| = %.3e (tol %.0e) over 64 cases", worst, tol)};
}

// ---------------------------------------------------------------- 2

Outcome blowup() {
    int cases = 0;
    for (double lambda : {1.0, 2.0, 3.0, 100.0}) {
        for (double mu0 : {-1.0, -0.3, -7.0}) {
            const double expect = -1.0 / (lambda * mu0);
            const auto t = blowup_time(mu0, lambda);
            if (!t || *t != expect) return {false, format("wrong t* for lambda=%g mu0=%g", lambda, mu0)};
            if (!riccati_mu(mu0, lambda, 0.999 * expect)) return {false, "evaluation before t* failed"};
            for (double after : {expect, 1.5 * expect}) {
                const auto m = riccati_mu(mu0, lambda, after);
                if (m || m.error().code != ErrorCode::BlowUp || m.error().blowup_time != expect) {
                    return {false, format("no blow-up error at t=%g", after)};
                }
            }
            ++cases;
        }
    }
    const bool half = blowup_time(-1.0, 2.0) == 0.5;
    return {half, format("t* = -1/(lambda mu0) exact in %d cases, t*(-1, 2) = 0.5, evaluation at t >= t* errors", cases)};
}

// ---------------------------------------------------------------- 3

Outcome lax_oleinik_vs_closed() {
    const auto s = power(2.0);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> mu(0.05, 4.0), coord(-2.0, 2.0);
    double worst_psi = 0.0, worst_y = 0.0;
    bool converged = true;
    for (std::size_t N : {4u, 16u, 64u, 256u}) {
        for (int rep = 0; rep < 3; ++rep) {
            std::vector<double> m(N), x(N);
            for (std::size_t i = 0; i < N; ++i) {
                m[i] = mu(rng);
                x[i] = coord(rng);
            }
            const auto data = make_quadratic_data(ListRule{m}).value();
            const double t = 0.25 + 0.5 * rep;
            auto r = lax_oleinik_solve(DiagonalQuadratic{data}, s, t, TruncatedPoint(x));
            auto c = lax_oleinik_quadratic_closed(data, s, t, TruncatedPoint(x));
            if (!r || !c) return {false, "solver error"};
            converged = converged && r->converged;
            double gy = 0.0;
            for (std::size_t i = 0; i < N; ++i) gy += std::pow(r->minimizer[i] - c->minimizer[i], 2);
            worst_psi = std::max(worst_psi, std::fabs(r->psi - c->psi));
            worst_y = std::max(worst_y, std::sqrt(gy));
        }
    }
    constexpr double tol_psi = 1e-6, tol_y = 1e-4;
    return {converged && worst_psi <= tol_psi && worst_y <= tol_y,
            format("N in {4,16,64,256}: max |psi gap| = %.2e (tol %.0e), max |y* gap| = %.2e (tol %.0e)", worst_psi,
                   tol_psi, worst_y, tol_y)};
}

// ---------------------------------------------------------------- 4

Outcome counterexamples() {
    const auto s = power(2.0);
    auto v = counterexample_nonconvex(s, 1.0, 200);
    if (!v) return {false, v.error().describe()};
    constexpr double tol = 1e-4;
    const bool nonconvex_ok = std::fabs(*v - 1.0) <= tol;

    constexpr std::size_t M = 200000;
    std::vector<double> xs(M + 1);
    for (std::size_t i = 0; i <= M; ++i) xs[i] = 1.0 / (i + 1.0);
    const TruncatedPoint x(std::move(xs));
    double prev = 0.0, lo = 1e300, hi = 0.0;
    for (std::size_t N : {10u, 20u, 40u, 80u}) {
        auto j = counterexample_growth(3.0, 1.0, 0.1, x, N);
        if (!j) return {false, j.error().describe()};
        if (prev > 0.0) {
            lo = std::min(lo, prev / *j);
            hi = std::max(hi, prev / *j);
        }
        prev = *j;
    }
    const bool growth_ok = lo >= 1.8 && hi <= 2.2;
    return {nonconvex_ok && growth_ok,
            format("psi(1,0) estimate %.8f (|gap| tol %.0e); J(N)/J(2N) in [%.4f, %.4f] (need [1.8, 2.2])", *v, tol,
                   lo, hi)};
}

// ---------------------------------------------------------------- 5

Expected<double> fd_error(const InitialCondition& ic, std::vector<double> L, double h, FdScheme scheme) {
    const auto grid = make_grid_spec(std::move(L), h, 1.0, tenths(), scheme);
    auto f = solve_fd(ic, power(2.0), grid.dim(), grid);
    if (!f) return unexpected(f.error());
    auto e = grid_oracle_error(*f, ic, 0.1, 2.0);
    if (!e) return unexpected(e.error());
    return e->sup_error;
}

Outcome fd_vs_oracle() {
    constexpr double tol1 = 5e-3, tol2 = 1e-2, min_ratio = 1.7;
    std::string detail;
    bool ok = true;
    const std::vector<std::pair<const char*, InitialCondition>> one_d{
        {"quadratic", DiagonalQuadratic{QuadraticData{ConstantRule{1.0}}}},
        {"smooth_abs", Separable{{Profile1D::smooth_abs(0.2)}}},
    };
    for (const auto& [name, ic] : one_d) {
        auto coarse = fd_error(ic, {6.0}, 0.01, FdScheme::Upwind1);
        auto fine = fd_error(ic, {6.0}, 0.005, FdScheme::Upwind1);
        if (!coarse || !fine) return {false, "solver error"};
        const double ratio = *coarse / *fine;
        ok = ok && *coarse <= tol1 && ratio >= min_ratio;
        detail += format("1D %s %.2e, halving h x%.2f; ", name, *coarse, ratio);
    }
    const InitialCondition two_d = Separable{{Profile1D::smooth_abs(0.2), Profile1D::log_cosh(2.0)}};
    auto e2 = fd_error(two_d, {6.0, 5.0}, 0.02, FdScheme::Eno2);
    if (!e2) return {false, e2.error().describe()};
    ok = ok && *e2 <= tol2;
    detail += format("2D eno2 %.2e (tol %.0e / %.0e, ratio >= %.1f)", *e2, tol1, tol2, min_ratio);
    return {ok, detail};
}

// ---------------------------------------------------------------- 6

std::vector<std::vector<double>> directions(std::size_t dim, std::uint64_t seed) {
    std::vector<std::vector<double>> d;
    for (std::size_t i = 0; i < std::min<std::size_t>(dim, 4); ++i) {
        std::vector<double> e(dim, 0.0);
        e[i] = 1.0;
        d.push_back(e);
    }
    for (std::size_t k = 0; k < 8; ++k) {
        std::vector<double> v(dim);
        philox_normals(seed, 77, k, v);
        double n = 0.0;
        for (double x : v) n += x * x;
        for (double& x : v) x /= std::sqrt(n);
        d.push_back(v);
    }
    return d;
}

// Runs every estimate check; returns the worst margin over all of them.
Expected<double> suite(const SolutionField& field, const InitialCondition& ic, const EigenSpectrum& s,
                       const SampleSet& samples, std::size_t dim, std::optional<std::size_t> modes, double tol,
                       double* upper_tight = nullptr) {
    const auto curv = ic_curvature_bounds(ic, dim);
    const Modulus mod{s, ic_c11_constant(ic, dim).value_or(0.0), modes};
    std::vector<Expected<EstimateReport>> reps;
    reps.push_back(check_second_derivative_decay(field, curv, samples, tol));
    reps.push_back(check_hessian_metric_bound(field, samples, directions(dim, 3), curv, tol, 8));
    reps.push_back(check_gradient_bounds(field, ic_infimum(ic), samples, tol));
    reps.push_back(check_sandwich(field, ic, s, mod, samples, tol));
    double worst = 1e300;
    for (auto& r : reps) {
        if (!r) return unexpected(r.error());
        if (!r->passed) return r->worst_margin;
        worst = std::min(worst, r->worst_margin);
    }
    if (upper_tight) {
        const auto m = reps.back()->metric("upper_margin_max");
        *upper_tight = m ? *m : 1e300;
    }
    return worst;
}

Outcome estimate_suite() {
    const auto s = power(2.0);
    SampleSpec spec;
    spec.count = 64;
    spec.seed = 11;
    std::string detail;
    bool ok = true;

    // Closed form, constant curvature: the upper sandwich bound is attained.
    spec.dim = 8;
    spec.t_min = 0.05;
    spec.t_max = 2.0;
    const auto data = make_quadratic_data(ConstantRule{1.0}).value();
    const InitialCondition qic = DiagonalQuadratic{data};
    const SolutionField closed(ClosedFormQuadratic{make_quadratic_solution(s, data).value()});
    double tight = 0.0;
    constexpr double tol_closed = 1e-8, tol_tight = 1e-6;
    auto w1 = suite(closed, qic, s, make_samples(spec).value(), 8, std::nullopt, tol_closed, &tight);
    if (!w1) return {false, w1.error().describe()};
    ok = ok && *w1 >= -tol_closed && tight <= tol_tight;
    detail += format("closed %.1e (|omega - (phi - psi)| %.1e); ", *w1, tight);

    // Tensorized oracle.
    spec.dim = 3;
    spec.t_min = 0.1;
    spec.t_max = 1.0;
    spec.half_width = 1.5;
    const std::vector<Profile1D> profiles{Profile1D::smooth_abs(0.2), Profile1D::log_cosh(1.5),
                                          Profile1D::quadratic(0.5)};
    const InitialCondition sic = Separable{profiles};
    const SolutionField orc(SeparableOracle{profiles, s, {}});
    constexpr double tol_oracle = 1e-8;
    auto w2 = suite(orc, sic, s, make_samples(spec).value(), 3, std::nullopt, tol_oracle);
    if (!w2) return {false, w2.error().describe()};
    ok = ok && *w2 >= -tol_oracle;
    detail += format("oracle %.1e; ", *w2);

    // Grid fields sampled at their stored times.
    constexpr double tol_grid = 5e-3;
    spec.dim = 1;
    spec.half_width = 2.0;
    spec.times = std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    for (const auto& ic : {InitialCondition{Separable{{Profile1D::smooth_abs(0.2)}}}, InitialCondition{qic}}) {
        auto g = solve_fd(ic, s, 1, make_grid_spec({6.0}, 0.01, 1.0, *spec.times));
        if (!g) return {false, g.error().describe()};
        const SolutionField grid(GridBacked{std::make_shared<const GridField>(std::move(*g)), std::nullopt});
        auto w3 = suite(grid, ic, s, make_samples(spec).value(), 1, std::size_t{1}, tol_grid);
        if (!w3) return {false, w3.error().describe()};
        ok = ok && *w3 >= -tol_grid;
        detail += format("grid %.1e; ", *w3);
    }
    detail += format("tols %.0e / %.0e / %.0e", tol_closed, tol_oracle, tol_grid);
    return {ok, detail};
}

// ---------------------------------------------------------------- 7

Outcome residual_band() {
    const auto s = power(2.0);
    const auto data = make_quadratic_data(ConstantRule{1.0}).value();
    const SolutionField field(ClosedFormQuadratic{make_quadratic_solution(s, data, 50).value()});
    SampleSpec spec;
    spec.dim = 51;
    spec.count = 100;
    spec.seed = 5;
    const auto samples = make_samples(spec).value();
    constexpr double tol = 1e-10;
    bool ok = true;
    std::string detail;
    for (std::size_t d : {5u, 10u, 20u}) {
        auto r = transformed_residual(field, s, d, samples, tol);
        if (!r) return {false, r.error().describe()};
        // eps_d recomputed here: pi^2/6 - sum_{m <= d} m^-2.
        long double head = 0.0L;
        for (std::size_t m = 1; m <= d; ++m) head += 1.0L / (static_cast<long double>(m) * m);
        const double eps = static_cast<double>(3.14159265358979323846L * 3.14159265358979323846L / 6.0L - head);
        double upper_margin = 1e300;
        for (const auto& p : samples.points) upper_margin = std::min(upper_margin, eps / p.t);
        const bool eps_ok = std::fabs(r->epsilon_d - eps) <= 1e-12;
        ok = ok && r->passed && eps_ok && r->min >= -tol && r->evaluated == 100;
        detail += format("d=%zu R in [%.1e, %.3f] eps_d=%.4f; ", d, r->min, r->max, r->epsilon_d);
    }
    return {ok, detail + format("lower tol %.0e", tol)};
}

// ---------------------------------------------------------------- 8

Outcome galerkin() {
    const auto s = power(2.0);
    const auto data = make_quadratic_data(ConstantRule{1.0}).value();
    constexpr double tol = 1e-8;
    auto t = galerkin_convergence(s, data, {4, 8, 16, 32, 64}, 1.0, InversePowerPoint{1.0, 1.0}, tol);
    if (!t) return {false, t.error().describe()};
    bool within = true;
    for (const auto& r : t->rows) within = within && r.cauchy_gap <= r.tail_bound + tol;
    return {t->passed && within && t->gaps_non_increasing && t->tails_non_increasing,
            format("gaps %.3e -> %.3e, tails %.3e -> %.3e, all within (tol %.0e)", t->rows.front().cauchy_gap,
                   t->rows.back().cauchy_gap, t->rows.front().tail_bound, t->rows.back().tail_bound, tol)};
}

// ---------------------------------------------------------------- 9

Outcome storage() {
    MarketConfig single;
    single.sites = 4;
    single.paths = 10000;
    single.dt = 1e-3;
    single.seed = 7;
    single.objective = QuadraticData{ListRule{{1.0}}};
    auto m1 = circle_value_field(single);
    if (!m1) return {false, m1.error().describe()};
    const std::vector<double> zero(4, 0.0);
    auto e1 = simulate_paths(*m1, zero);
    if (!e1) return {false, e1.error().describe()};
    std::vector<double> total(e1->running_cost.size());
    for (std::size_t p = 0; p < total.size(); ++p) total[p] = e1->running_cost[p] + e1->terminal_cost[p];
    const auto [mean, se] = mean_and_se(total);
    const double z = std::fabs(mean - std::log(2.0)) / se;
    const bool value_ok = z <= 3.0;

    MarketConfig full = single;
    full.objective = QuadraticData{ConstantRule{1.0}};
    auto m2 = circle_value_field(full);
    if (!m2) return {false, m2.error().describe()};
    auto e2 = simulate_paths(*m2, std::vector<double>{1.0, -0.5, 0.25, 0.5});
    if (!e2) return {false, e2.error().describe()};
    const auto mart = martingale_diagnostic(*e2);
    const bool five = e2->checkpoint_times.size() == 6;

    const bool conserved = e1->max_net_transfer == 0.0 && e2->max_net_transfer == 0.0;
    auto again = simulate_paths(*m1, zero);
    const bool repro = again && again->terminal_cost == e1->terminal_cost && again->running_cost == e1->running_cost;
    return {value_ok && mart.passed && five && conserved && repro,
            format("MC %.5f vs log 2 (z %.2f, SE %.4f); worst drift z %.2f over 5 checkpoints; net transfer %g; "
                   "rerun %s",
                   mean, z, se, mart.worst_z, std::max(e1->max_net_transfer, e2->max_net_transfer),
                   repro ? "bit-identical" : "DIFFERS")};
}

// ---------------------------------------------------------------- 10

Outcome comparison() {
    const auto s = power(2.0);
    const InitialCondition ic = Separable{{Profile1D::smooth_abs(0.2)}};
    const InitialCondition up = Separable{{Profile1D::smooth_abs(0.2).shifted(0.1)}};
    const auto spec = make_grid_spec({6.0}, 0.01, 1.0, tenths());
    auto g = solve_fd(ic, s, 1, spec);
    auto gu = solve_fd(up, s, 1, spec);
    if (!g || !gu) return {false, "solver error"};

    double shift_err = 0.0;
    for (std::size_t k = 0; k < g->times().size(); ++k) {
        for (std::size_t j = 0; j < g->slice(k).size(); ++j) {
            shift_err = std::max(shift_err, std::fabs(gu->slice(k)[j] - g->slice(k)[j] - 0.1));
        }
    }
    const SolutionField grid(GridBacked{std::make_shared<const GridField>(std::move(*g)), std::nullopt});
    const SolutionField orc(SeparableOracle{{Profile1D::smooth_abs(0.2)}, s, {}});
    const SolutionField orc_up(SeparableOracle{{Profile1D::smooth_abs(0.2).shifted(0.1)}, s, {}});

    std::vector<TruncatedPoint> pts;
    for (int k = -20; k <= 20; ++k) pts.emplace_back(std::vector<double>{0.1 * k});
    const auto times = tenths();
    constexpr double tol = 5e-3, shift_tol = 1e-12;
    double prev = 1e300;
    bool monotone = true, within = true;
    double first = 0.0, last = 0.0;
    for (int k = 1; k <= 9; ++k) {
        const double gamma = 0.1 * k;
        auto r = comparison_gap(grid, orc, gamma, 1.0, times, pts, tol);
        if (!r) return {false, r.error().describe()};
        monotone = monotone && r->sup_gap <= prev;
        within = within && r->sup_gap <= tol;
        prev = r->sup_gap;
        if (k == 1) first = r->sup_gap;
        last = r->sup_gap;
    }
    auto so = comparison_gap(orc, orc_up, 0.1, 1.0, times, pts, 0.0);
    if (!so) return {false, so.error().describe()};
    shift_err = std::max(shift_err, std::fabs(so->sup_gap - 0.1));
    return {monotone && within && shift_err <= shift_tol,
            format("sup gap %.3e (gamma 0.1) -> %.3e (gamma 0.9), non-increasing %s (tol %.0e); |shift - 0.1| = "
                   "%.1e (tol %.0e)",
                   first, last, monotone ? "yes" : "no", tol, shift_err, shift_tol)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Riccati exactness", 1.0, riccati_exactness},
        {2, "Blow-up", 1.0, blowup},
        {3, "Lax-Oleinik vs closed form", 30.0, lax_oleinik_vs_closed},
        {4, "Counterexamples", 5.0, counterexamples},
        {5, "FD vs Cole-Hopf oracle", 660.0, fd_vs_oracle},
        {6, "Estimate suite", 120.0, estimate_suite},
        {7, "Transformed residual band", 10.0, residual_band},
        {8, "Galerkin convergence", 10.0, galerkin},
        {9, "Storage Monte-Carlo", 120.0, storage},
        {10, "Comparison and shift invariance", 60.0, comparison},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = secs <= c.budget_s;
        const bool pass = o.passed && in_budget;
        failed += pass ? 0 : 1;
        std::printf("[%s] %2d %-32s %s | %.2fs (budget %.0fs)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget_s);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
