#include "commands.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hjblab/convergence.hpp"
#include "hjblab/deterministic.hpp"
#include "hjblab/field.hpp"
#include "hjblab/parallel.hpp"
#include "hjblab/quadratic.hpp"
#include "hjblab/sampling.hpp"
#include "hjblab/storage.hpp"
#include "hjblab/verify.hpp"

namespace hjbcli {

void Run::write(const std::string& name, const std::string& content) {
    const auto path = out_dir / name;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw RuntimeFailure("cannot write " + path.string());
    os << content;
    if (!os) throw RuntimeFailure("write failed for " + path.string());
    outputs.push_back(name);
}

void Run::say(const std::string& line) const {
    if (!quiet) std::cout << line << '\n';
}

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

json null_or(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

// Little-endian f64 payload, independent of the host byte order.
void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

struct Problem {
    hjb::EigenSpectrum spectrum;
    hjb::InitialCondition initial;
    std::optional<std::size_t> level;
};

Problem read_problem(const Table& root) {
    auto spectrum = parse_spectrum(root.table("spectrum"));
    std::optional<std::size_t> level;
    auto initial = parse_initial_condition(root.table("initial"), &level);
    return Problem{std::move(spectrum), std::move(initial), level};
}

const hjb::QuadraticData& quadratic_of(const Problem& p, const Table& root) {
    const auto* q = std::get_if<hjb::DiagonalQuadratic>(&p.initial);
    if (!q) throw ConfigError(root.path_of("initial.kind"), "this experiment needs quadratic initial data");
    return q->data;
}

// ---------------------------------------------------------------- spectrum-check

bool run_spectrum_check(Run& run) {
    const auto spectrum = parse_spectrum(run.root.table("spectrum"));
    std::size_t terms = 1000, list = 16;
    if (auto t = run.root.optional_table("spectrum_check")) {
        terms = t->count("terms", terms);
        list = t->count("list", list);
        t->finish();
    }
    run.config_done();
    if (const auto cap = spectrum.capacity()) {
        terms = std::min(terms, *cap);
        list = std::min(list, *cap);
    }
    std::string csv = "index,lambda\n";
    for (std::size_t i = 0; i < list; ++i) csv += std::to_string(i) + "," + g17(spectrum.eigenvalue(i)) + "\n";
    run.write("spectrum.csv", csv);

    const auto rep = need(hjb::summability_report(spectrum, terms));
    json j{{"spectrum", spectrum.describe()},
           {"terms_used", rep.terms_used},
           {"partial_sum", rep.partial_sum},
           {"tail_bound", rep.tail_bound},
           {"tail_kind", rep.tail_kind == hjb::TailKind::IntegralBound ? "integral_bound" : "exact_remainder"},
           {"converges", rep.converges}};
    run.write("summability.json", j.dump(2) + "\n");
    run.summary = j;
    run.say(spectrum.describe() + ": sum log(1+lambda)/lambda = " + g17(rep.partial_sum) + " + tail <= " +
            g17(rep.tail_bound));
    return rep.converges;
}

// ---------------------------------------------------------------- riccati

bool run_riccati(Run& run) {
    const auto problem = read_problem(run.root);
    const auto& data = quadratic_of(problem, run.root);
    const auto t = run.root.table("riccati");
    const auto times = t.numbers("times");
    std::size_t modes = t.count("modes", data.support().value_or(4));
    const auto steps = t.count("rk4_steps", 10000);
    const double tol = t.number("tolerance", 1e-9);
    t.finish();
    run.config_done();
    if (const auto cap = problem.spectrum.capacity()) modes = std::min(modes, *cap);

    bool ok = true;
    double worst = 0.0;
    std::string csv = "mode,lambda,mu0,t,status,mu_closed,mu_rk4,abs_error\n";
    json jm = json::array();
    for (std::size_t i = 0; i < modes; ++i) {
        const double lambda = problem.spectrum.eigenvalue(i);
        const double mu0 = data.mu0_at(i);
        const auto blow = hjb::blowup_time(mu0, lambda);
        jm.push_back({{"index", i}, {"lambda", lambda}, {"mu0", mu0}, {"blowup_time", null_or(blow)}});
        for (double tt : times) {
            std::string row = std::to_string(i) + "," + g17(lambda) + "," + g17(mu0) + "," + g17(tt) + ",";
            if (blow && tt >= *blow) {
                const auto m = hjb::riccati_mu(mu0, lambda, tt);
                const bool refused = !m && m.error().code == hjb::ErrorCode::BlowUp;
                ok = ok && refused;
                csv += row + (refused ? "blowup" : "blowup_not_reported") + ",,,\n";
                continue;
            }
            const auto c = need(hjb::riccati_ode_crosscheck(mu0, lambda, tt, steps));
            worst = std::max(worst, c.abs_error);
            const bool pass = c.abs_error <= tol;
            ok = ok && pass;
            csv += row + (pass ? "ok" : "mismatch") + "," + g17(c.closed_form) + "," + g17(c.integrated) + "," +
                   g17(c.abs_error) + "\n";
        }
    }
    json jc = json::array();
    if (data.admissible()) {
        const auto sol = need(hjb::make_quadratic_solution(problem.spectrum, data, problem.level));
        for (double tt : times) {
            const auto c = need(hjb::c_of_t(sol, tt, sol.c_tolerance));
            jc.push_back({{"t", tt}, {"c", c.value}, {"error_bound", c.error_bound}, {"terms", c.terms}});
        }
    }
    run.write("riccati.csv", csv);
    json j{{"modes", jm}, {"c_of_t", jc}, {"worst_abs_error", worst}, {"tolerance", tol}, {"passed", ok}};
    run.write("riccati.json", j.dump(2) + "\n");
    run.summary = {{"worst_abs_error", worst}, {"passed", ok}};
    for (const auto& m : jm) {
        if (!m["blowup_time"].is_null()) run.say("mode " + m["index"].dump() + " blows up at t* = " + m["blowup_time"].dump());
    }
    run.say("worst |closed - RK4| = " + fmt("%.3e", worst));
    return ok;
}

// ---------------------------------------------------------------- lax-oleinik

std::vector<hjb::TruncatedPoint> read_points(const Table& t, std::uint64_t seed) {
    std::vector<hjb::TruncatedPoint> pts;
    if (t.has("points")) {
        const auto& arr = t.raw("points");
        if (!arr.is_array() || arr.empty()) throw ConfigError(t.path_of("points"), "expected an array of points");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const auto key = t.path_of("points") + "[" + std::to_string(k) + "]";
            if (!arr[k].is_array() || arr[k].empty()) throw ConfigError(key, "expected a non-empty array of numbers");
            std::vector<double> x;
            for (const auto& v : arr[k]) {
                if (!v.is_number()) throw ConfigError(key, "expected numbers");
                x.push_back(v.get<double>());
            }
            pts.emplace_back(std::move(x));
        }
        return pts;
    }
    const auto r = t.table("random");
    hjb::SampleSpec s;
    s.dim = r.count("dim", 4);
    s.count = r.count("count", 8);
    s.half_width = r.number("half_width", 2.0);
    s.times = std::vector<double>{0.0};
    s.seed = seed;
    r.finish();
    for (auto& p : need(hjb::make_samples(s)).points) pts.push_back(std::move(p.x));
    return pts;
}

bool run_lax_oleinik(Run& run) {
    const auto t = run.root.table("lax_oleinik");
    const auto mode = t.string("mode", "solve");
    if (mode == "growth") {
        const double alpha = t.number("alpha"), beta = t.number("beta"), tt = t.number("t");
        const auto levels = t.counts("levels");
        const auto rule = parse_point_rule(t.table("point"));
        const auto point_level = t.count("point_level", 200000);
        const double lo = t.number("ratio_min", 1.8), hi = t.number("ratio_max", 2.2);
        t.finish();
        run.config_done();
        std::vector<double> xs(point_level + 1);
        for (std::size_t i = 0; i <= point_level; ++i) xs[i] = hjb::point_coordinate(rule, i);
        const hjb::TruncatedPoint x(std::move(xs));
        std::string csv = "N,J,ratio_to_previous\n";
        bool ok = true;
        double prev = 0.0;
        json rows = json::array();
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const double J = need(hjb::counterexample_growth(alpha, beta, tt, x, levels[k]));
            const double ratio = k ? prev / J : 0.0;
            if (k) ok = ok && ratio >= lo && ratio <= hi;
            csv += std::to_string(levels[k]) + "," + g17(J) + "," + (k ? g17(ratio) : std::string()) + "\n";
            rows.push_back({{"N", levels[k]}, {"J", J}, {"ratio_to_previous", k ? json(ratio) : json(nullptr)}});
            run.say("N = " + std::to_string(levels[k]) + "  J = " + g17(J) + (k ? "  ratio " + fmt("%.4f", ratio) : ""));
            prev = J;
        }
        run.write("growth.csv", csv);
        run.summary = {{"rows", rows}, {"ratio_range", {lo, hi}}, {"passed", ok}};
        run.write("growth.json", run.summary.dump(2) + "\n");
        return ok;
    }
    if (mode == "nonconvex") {
        const auto spectrum = parse_spectrum(run.root.table("spectrum"));
        const double tt = t.number("t");
        const auto probes = t.counts("n_probe");
        const double expected = t.number("expected", 1.0);
        const double tol = t.number("tolerance", 1e-4);
        t.finish();
        run.config_done();
        std::string csv = "n_probe,estimate,abs_gap\n";
        double last = 0.0;
        for (auto n : probes) {
            last = need(hjb::counterexample_nonconvex(spectrum, tt, n));
            csv += std::to_string(n) + "," + g17(last) + "," + g17(std::fabs(last - expected)) + "\n";
        }
        const bool ok = !probes.empty() && std::fabs(last - expected) <= tol;
        run.write("nonconvex.csv", csv);
        run.summary = {{"estimate", last}, {"expected", expected}, {"tolerance", tol}, {"passed", ok}};
        run.write("nonconvex.json", run.summary.dump(2) + "\n");
        run.say("psi(t,0) estimate " + g17(last) + " (expected " + g17(expected) + ")");
        return ok;
    }
    if (mode != "solve") throw ConfigError(t.path_of("mode"), "unknown mode '" + mode + "' (solve | growth | nonconvex)");

    const auto problem = read_problem(run.root);
    const double tt = t.number("t");
    hjb::LaxOleinikConfig cfg;
    cfg.tol = t.number("tol", cfg.tol);
    cfg.max_iter = t.count("max_iter", cfg.max_iter);
    const double psi_tol = t.number("psi_tolerance", 1e-6);
    const double y_tol = t.number("minimizer_tolerance", 1e-4);
    const auto points = read_points(t, run.seed);
    t.finish();
    run.config_done();

    const auto* quad = std::get_if<hjb::DiagonalQuadratic>(&problem.initial);
    std::string csv = "point,level,psi,iterations,converged,residual,psi_closed,psi_gap,minimizer_gap\n";
    bool ok = true;
    double worst_psi = 0.0, worst_y = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto r = need(hjb::lax_oleinik_solve(problem.initial, problem.spectrum, tt, points[k], cfg));
        ok = ok && r.converged;
        csv += std::to_string(k) + "," + std::to_string(points[k].level()) + "," + g17(r.psi) + "," +
               std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") + "," + g17(r.residual) + ",";
        if (quad) {
            const auto c = need(hjb::lax_oleinik_quadratic_closed(quad->data, problem.spectrum, tt, points[k]));
            const double gp = std::fabs(r.psi - c.psi);
            double gy = 0.0;
            for (std::size_t i = 0; i < c.minimizer.size(); ++i) {
                gy += (r.minimizer[i] - c.minimizer[i]) * (r.minimizer[i] - c.minimizer[i]);
            }
            gy = std::sqrt(gy);
            worst_psi = std::max(worst_psi, gp);
            worst_y = std::max(worst_y, gy);
            ok = ok && gp <= psi_tol && gy <= y_tol;
            csv += g17(c.psi) + "," + g17(gp) + "," + g17(gy) + "\n";
        } else {
            csv += ",,\n";
        }
    }
    run.write("lax_oleinik.csv", csv);
    run.summary = {{"points", points.size()}, {"passed", ok}};
    if (quad) {
        run.summary["worst_psi_gap"] = worst_psi;
        run.summary["worst_minimizer_gap"] = worst_y;
        run.say("worst |psi - closed| = " + fmt("%.3e", worst_psi) + ", worst |y* gap| = " + fmt("%.3e", worst_y));
    }
    run.write("lax_oleinik.json", run.summary.dump(2) + "\n");
    return ok;
}

// ---------------------------------------------------------------- solve-fd

double default_grid_tolerance(std::size_t dim) { return dim == 1 ? 5e-3 : 1e-2; }

bool run_solve_fd(Run& run) {
    const auto problem = read_problem(run.root);
    const auto grid = parse_grid(run.root.table("grid"));
    bool compare = true, write_binary = true, write_csv = true;
    double t_min = 0.1, window = 2.0, tol = default_grid_tolerance(grid.dim());
    if (auto t = run.root.optional_table("solve_fd")) {
        compare = t->boolean("compare_oracle", compare);
        t_min = t->number("t_min", t_min);
        window = t->number("window", window);
        tol = t->number("tolerance", tol);
        write_binary = t->boolean("write_binary", write_binary);
        write_csv = t->boolean("write_csv", write_csv);
        t->finish();
    }
    run.config_done();

    const auto field = need(hjb::solve_fd(problem.initial, problem.spectrum, grid.dim(), grid));
    run.say(field.description() + ", " + std::to_string(field.steps_taken()) + " steps");
    if (write_binary) {
        std::ostringstream os;
        need(field.write_binary(os));
        run.write("field.bin", os.str());
    }
    if (write_csv) {
        for (std::size_t k = 0; k < field.times().size(); ++k) {
            std::ostringstream os;
            need(field.write_csv(os, k));
            run.write("slice_" + std::to_string(k) + ".csv", os.str());
        }
    }
    json j{{"description", field.description()}, {"steps", field.steps_taken()}, {"times", field.times()}};
    bool ok = true;
    if (compare) {
        const auto e = need(hjb::grid_oracle_error(field, problem.initial, t_min, window));
        ok = e.sup_error <= tol;
        j["oracle"] = {{"sup_error", e.sup_error}, {"worst_t", e.worst_t},    {"worst_x", e.worst_x},
                       {"nodes", e.evaluated},     {"tolerance", tol},        {"window", window},
                       {"t_min", t_min},           {"passed", ok}};
        run.say("sup |grid - oracle| = " + fmt("%.3e", e.sup_error) + " (tolerance " + fmt("%.1e", tol) + ")");
    }
    run.write("fd.json", j.dump(2) + "\n");
    run.summary = j;
    return ok;
}

// ---------------------------------------------------------------- verify

std::vector<std::vector<double>> make_directions(std::size_t dim, std::size_t random, std::uint64_t seed) {
    std::vector<std::vector<double>> dirs;
    for (std::size_t i = 0; i < std::min<std::size_t>(dim, 4); ++i) {
        std::vector<double> e(dim, 0.0);
        e[i] = 1.0;
        dirs.push_back(std::move(e));
    }
    for (std::size_t k = 0; k < random; ++k) {
        std::vector<double> v(dim);
        hjb::philox_normals(seed, 0x5eed, k, v);
        double n = 0.0;
        for (double x : v) n += x * x;
        n = std::sqrt(n);
        for (double& x : v) x /= n;
        dirs.push_back(std::move(v));
    }
    return dirs;
}

bool run_verify(Run& run) {
    const auto problem = read_problem(run.root);
    const auto v = run.root.table("verify");
    const auto kind = v.string("field", "closed_form");
    std::optional<hjb::GridSpec> grid;
    if (kind == "grid") {
        grid = parse_grid(run.root.table("grid"));
    } else if (kind != "closed_form" && kind != "oracle") {
        throw ConfigError(v.path_of("field"), "unknown field '" + kind + "' (closed_form | oracle | grid)");
    }
    const auto* quad = std::get_if<hjb::DiagonalQuadratic>(&problem.initial);
    const auto* sep = std::get_if<hjb::Separable>(&problem.initial);
    if (kind == "closed_form" && !quad) throw ConfigError(v.path_of("field"), "closed_form needs quadratic data");
    if (kind == "oracle" && !sep) throw ConfigError(v.path_of("field"), "oracle needs separable data");

    std::size_t dim = grid ? grid->dim() : (sep ? sep->profiles.size() : problem.level.value_or(7) + 1);
    dim = v.count("dim", dim);
    const double default_tol = grid ? default_grid_tolerance(grid->dim()) : 1e-8;
    const double tol = v.number("tolerance", default_tol);
    std::vector<std::string> default_checks{"second_derivative_decay", "hessian_metric_bound", "gradient_bounds",
                                            "sandwich"};
    if (!grid) default_checks.push_back("time_derivative_growth");
    const auto checks = v.strings("checks", default_checks);
    const auto residual_d = v.has("residual_d") ? v.counts("residual_d") : std::vector<std::size_t>{};
    const auto n_dirs = v.count("random_directions", 8);
    const auto lattice_times = v.count("lattice_times", 8);
    const auto pair_modes = v.count("pair_modes", 8);
    std::optional<double> modulus_c;
    if (v.has("modulus_c")) modulus_c = v.number("modulus_c");
    v.finish();

    hjb::SampleSpec ss;
    if (auto s = run.root.optional_table("samples")) {
        ss = parse_samples(*s, dim, run.seed);
    } else {
        ss.dim = dim;
        ss.seed = run.seed;
    }
    if (grid && !ss.times) {
        std::vector<double> ts;
        for (double t : grid->save_times) {
            if (t >= ss.t_min) ts.push_back(t);
        }
        ss.times = ts;
    }
    run.config_done();

    std::optional<hjb::SolutionField> field;
    if (kind == "closed_form") {
        auto sol = need(hjb::make_quadratic_solution(problem.spectrum, quad->data, problem.level));
        field.emplace(hjb::ClosedFormQuadratic{std::move(sol)});
    } else if (kind == "oracle") {
        field.emplace(hjb::SeparableOracle{sep->profiles, problem.spectrum, {}});
    } else {
        auto g = need(hjb::solve_fd(problem.initial, problem.spectrum, grid->dim(), *grid));
        run.say(g.description());
        field.emplace(hjb::GridBacked{std::make_shared<const hjb::GridField>(std::move(g)), std::nullopt});
    }

    const auto samples = need(hjb::make_samples(ss));
    const auto curv = hjb::ic_curvature_bounds(problem.initial, dim);
    const double C = modulus_c ? *modulus_c : hjb::ic_c11_constant(problem.initial, dim).value_or(0.0);
    const hjb::Modulus modulus{problem.spectrum, C, grid ? std::optional<std::size_t>(grid->dim()) : problem.level
                                                                                                           ? std::optional<std::size_t>(*problem.level + 1)
                                                                                                           : std::nullopt};
    std::vector<hjb::EstimateReport> reports;
    for (const auto& c : checks) {
        if (c == "second_derivative_decay") {
            reports.push_back(need(hjb::check_second_derivative_decay(*field, curv, samples, tol)));
        } else if (c == "hessian_metric_bound") {
            reports.push_back(need(hjb::check_hessian_metric_bound(*field, samples, make_directions(dim, n_dirs, run.seed),
                                                                    curv, tol, pair_modes)));
        } else if (c == "gradient_bounds") {
            reports.push_back(need(hjb::check_gradient_bounds(*field, hjb::ic_infimum(problem.initial), samples, tol)));
        } else if (c == "sandwich") {
            reports.push_back(need(hjb::check_sandwich(*field, problem.initial, problem.spectrum, modulus, samples, tol)));
        } else if (c == "time_derivative_growth") {
            // Monotonicity in t compares the same spatial points at every time.
            auto lattice = ss;
            if (!lattice.times) {
                std::vector<double> ts(std::max<std::size_t>(lattice_times, 2));
                for (std::size_t k = 0; k < ts.size(); ++k) {
                    ts[k] = ss.t_min + (ss.t_max - ss.t_min) * static_cast<double>(k) / static_cast<double>(ts.size() - 1);
                }
                lattice.times = ts;
            }
            const auto ls = need(hjb::make_samples(lattice));
            reports.push_back(need(hjb::time_derivative_growth_check(*field, ls, tol)));
        } else {
            throw ConfigError("verify.checks", "unknown check '" + c + "'");
        }
    }
    bool ok = true;
    for (const auto& r : reports) ok = ok && r.passed;
    json residuals = json::array();
    for (auto d : residual_d) {
        const auto r = need(hjb::transformed_residual(*field, problem.spectrum, d, samples, tol));
        ok = ok && r.passed;
        residuals.push_back({{"d", d},
                             {"min", r.min},
                             {"max", r.max},
                             {"mean", r.mean},
                             {"epsilon_d", r.epsilon_d},
                             {"worst_margin", r.worst_margin},
                             {"evaluated", r.evaluated},
                             {"passed", r.passed}});
    }
    json j{{"field", field->kind_name()},
           {"estimates", json::parse(hjb::reports_to_json(reports))},
           {"residuals", residuals},
           {"modulus_c", C},
           {"passed", ok}};
    run.write("estimates.json", j.dump(2) + "\n");
    const auto table = hjb::reports_to_table(reports);
    run.write("estimates.txt", table);
    if (!run.quiet) std::cout << table;
    run.summary = {{"field", field->kind_name()}, {"passed", ok}};
    return ok;
}

// ---------------------------------------------------------------- converge

bool run_converge(Run& run) {
    const auto problem = read_problem(run.root);
    const auto& data = quadratic_of(problem, run.root);
    const auto t = run.root.table("converge");
    const auto levels = t.counts("levels");
    const double tt = t.number("t", 1.0);
    const auto point = parse_point_rule(t.table("point"));
    const double tol = t.number("tolerance", 1e-8);
    t.finish();
    run.config_done();

    const auto table = need(hjb::galerkin_convergence(problem.spectrum, data, levels, tt, point, tol));
    std::string csv = "N,value,cauchy_gap,c_tail,psi_tail,tail_bound,within\n";
    for (const auto& r : table.rows) {
        csv += std::to_string(r.level) + "," + g17(r.value) + "," + g17(r.cauchy_gap) + "," + g17(r.c_tail) + "," +
               g17(r.psi_tail) + "," + g17(r.tail_bound) + "," + (r.within ? "1" : "0") + "\n";
        run.say("N = " + std::to_string(r.level) + "  gap " + fmt("%.4e", r.cauchy_gap) + "  tail " +
                fmt("%.4e", r.tail_bound));
    }
    run.write("converge.csv", csv);
    run.summary = {{"gaps_non_increasing", table.gaps_non_increasing},
                   {"tails_non_increasing", table.tails_non_increasing},
                   {"passed", table.passed}};
    run.write("converge.json", run.summary.dump(2) + "\n");
    return table.passed;
}

// ---------------------------------------------------------------- storage-sim

std::string encode_paths(const hjb::PathEnsemble& e) {
    json header{{"format", "hjblab-paths"},
                {"paths", e.trajectories.size()},
                {"states_per_path", e.steps + 1},
                {"sites", e.config.sites},
                {"record", "s, running_cost, k[sites], p[sites], f[sites]"}};
    const std::string h = header.dump();
    std::string out = "HJBP0001";
    put_u64(out, h.size());
    out += h;
    for (const auto& path : e.trajectories) {
        for (const auto& st : path) {
            put_f64(out, st.s);
            put_f64(out, st.running_cost);
            for (double v : st.k) put_f64(out, v);
            for (double v : st.p) put_f64(out, v);
            for (double v : st.f) put_f64(out, v);
        }
    }
    return out;
}

bool run_storage(Run& run) {
    const auto t = run.root.table("storage");
    auto cfg = parse_market(t, run.seed);
    auto k0 = t.numbers("k0", std::vector<double>(cfg.sites, 0.0));
    const double bias = t.number("bias_allowance", 0.0);
    const bool check_value = t.boolean("check_value", true);
    const bool check_martingale = t.boolean("check_martingale", true);
    t.finish();
    run.config_done();
    if (k0.size() != cfg.sites) throw ConfigError(t.path_of("k0"), "length must equal storage.sites");

    const auto market = need(hjb::circle_value_field(cfg));
    const auto ens = need(hjb::simulate_paths(market, k0));
    const auto mc = need(hjb::verify_value_mc(ens, market, bias));
    const auto mart = hjb::martingale_diagnostic(ens);
    const bool conserved = ens.max_net_transfer == 0.0;

    std::ostringstream csv;
    hjb::write_drift_csv(csv, mart);
    run.write("storage_summary.csv", csv.str());
    if (!ens.trajectories.empty()) run.write("paths.bin", encode_paths(ens));

    bool ok = conserved;
    if (check_value) ok = ok && mc.passed;
    if (check_martingale) ok = ok && mart.passed;
    json j{{"sites", cfg.sites},
           {"transfer_cost", cfg.transfer_cost()},
           {"sigma", cfg.sigma},
           {"paths", cfg.paths},
           {"steps", ens.steps},
           {"value",
            {{"mc_estimate", mc.mc_estimate},
             {"std_error", mc.std_error},
             {"field_value", mc.field_value},
             {"z_score", mc.z_score},
             {"bias_allowance", mc.bias_allowance},
             {"passed", mc.passed}}},
           {"martingale", {{"worst_z", mart.worst_z}, {"passed", mart.passed}}},
           {"conservation", {{"max_abs_net_transfer", ens.max_net_transfer}, {"passed", conserved}}},
           {"passed", ok}};
    run.write("storage.json", j.dump(2) + "\n");
    run.summary = j;
    run.say("MC value " + fmt("%.6f", mc.mc_estimate) + " +- " + fmt("%.6f", mc.std_error) + " vs field " +
            fmt("%.6f", mc.field_value) + " (z = " + fmt("%.2f", mc.z_score) + ")");
    run.say("martingale worst |drift|/SE = " + fmt("%.2f", mart.worst_z) + ", conservation residual " +
            g17(ens.max_net_transfer));
    return ok;
}

}  // namespace

bool run_experiment(const std::string& name, Run& run) {
    if (name == "spectrum-check") return run_spectrum_check(run);
    if (name == "riccati") return run_riccati(run);
    if (name == "lax-oleinik") return run_lax_oleinik(run);
    if (name == "solve-fd") return run_solve_fd(run);
    if (name == "verify") return run_verify(run);
    if (name == "converge") return run_converge(run);
    if (name == "storage-sim") return run_storage(run);
    throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

}  // namespace hjbcli
