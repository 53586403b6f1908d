#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <toml.hpp>

namespace hjbcli {

namespace {

json from_toml(const toml::node& node) {
    if (const auto* t = node.as_table()) {
        json out = json::object();
        for (const auto& [k, v] : *t) out[std::string(k.str())] = from_toml(v);
        return out;
    }
    if (const auto* a = node.as_array()) {
        json out = json::array();
        for (const auto& v : *a) out.push_back(from_toml(v));
        return out;
    }
    if (const auto* v = node.as_integer()) return v->get();
    if (const auto* v = node.as_floating_point()) return v->get();
    if (const auto* v = node.as_boolean()) return v->get();
    if (const auto* v = node.as_string()) return v->get();
    throw ConfigError("", "unsupported TOML value (dates and times are not accepted)");
}

std::string type_name(const json& j) {
    if (j.is_number()) return "number";
    if (j.is_string()) return "string";
    if (j.is_boolean()) return "boolean";
    if (j.is_array()) return "array";
    if (j.is_object()) return "table";
    return "null";
}

}  // namespace

json load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json doc;
    if (path.extension() == ".toml") {
        try {
            doc = from_toml(toml::parse(text, path.string()));
        } catch (const toml::parse_error& e) {
            std::ostringstream msg;
            msg << "TOML parse error at line " << e.source().begin.line << ", column " << e.source().begin.column
                << ": " << e.description();
            throw ConfigError("", msg.str());
        }
    } else {
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError("", std::string("JSON parse error: ") + e.what());
        }
    }
    if (!doc.is_object()) throw ConfigError("", "config root must be a table");
    return doc;
}

Table::Table(const json& node, std::string path) : node_(&node), path_(std::move(path)) {
    if (!node.is_object()) throw ConfigError(path_, "expected a table, found " + type_name(node));
}

bool Table::has(const std::string& key) const { return node_->contains(key); }

std::string Table::path_of(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

const json& Table::at(const std::string& key) const {
    if (!has(key)) throw ConfigError(path_of(key), "required key is missing");
    seen_.insert(key);
    return (*node_)[key];
}

const json& Table::raw(const std::string& key) const { return at(key); }

double Table::number(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number()) throw ConfigError(path_of(key), "expected a number, found " + type_name(v));
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path_of(key), "must be finite");
    return d;
}

double Table::number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

std::int64_t Table::integer(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(path_of(key), "expected an integer, found " + type_name(v));
    return v.get<std::int64_t>();
}

std::int64_t Table::integer(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
}

std::size_t Table::count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const auto v = integer(key);
    if (v < 0) throw ConfigError(path_of(key), "must be non-negative");
    return static_cast<std::size_t>(v);
}

std::uint64_t Table::u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(path_of(key), "expected a non-negative integer");
}

bool Table::boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_boolean()) throw ConfigError(path_of(key), "expected a boolean, found " + type_name(v));
    return v.get<bool>();
}

std::string Table::string(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_string()) throw ConfigError(path_of(key), "expected a string, found " + type_name(v));
    return v.get<std::string>();
}

std::string Table::string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
}

std::vector<double> Table::numbers(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw ConfigError(path_of(key), "expected an array of numbers, found " + type_name(v));
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
            throw ConfigError(path_of(key) + "[" + std::to_string(i) + "]", "expected a finite number");
        }
        out.push_back(v[i].get<double>());
    }
    return out;
}

std::vector<double> Table::numbers(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? numbers(key) : std::move(fallback);
}

std::vector<std::size_t> Table::counts(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw ConfigError(path_of(key), "expected an array of integers, found " + type_name(v));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_integer() || v[i].get<std::int64_t>() < 0) {
            throw ConfigError(path_of(key) + "[" + std::to_string(i) + "]", "expected a non-negative integer");
        }
        out.push_back(static_cast<std::size_t>(v[i].get<std::int64_t>()));
    }
    return out;
}

std::vector<std::string> Table::strings(const std::string& key, std::vector<std::string> fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_array()) throw ConfigError(path_of(key), "expected an array of strings, found " + type_name(v));
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_string()) throw ConfigError(path_of(key) + "[" + std::to_string(i) + "]", "expected a string");
        out.push_back(v[i].get<std::string>());
    }
    return out;
}

Table Table::table(const std::string& key) const { return Table(at(key), path_of(key)); }

std::optional<Table> Table::optional_table(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return table(key);
}

void Table::finish() const {
    for (const auto& [k, v] : node_->items()) {
        if (!seen_.count(k)) throw ConfigError(path_of(k), "unknown key");
    }
}

namespace {

template <typename T>
T unwrap(hjb::Expected<T> e, const std::string& key) {
    if (!e) throw ConfigError(key, e.error().message);
    return std::move(e).value();
}

}  // namespace

hjb::EigenSpectrum parse_spectrum(const Table& t) {
    const auto kind = t.string("kind");
    hjb::SpectrumDescriptor d;
    if (kind == "power_law") {
        d = hjb::PowerLawSpec{t.number("alpha", 2.0)};
    } else if (kind == "circle") {
        d = hjb::CircleSpec{t.count("sites", 16)};
    } else if (kind == "explicit") {
        d = hjb::ExplicitSpec{t.numbers("values")};
    } else {
        throw ConfigError(t.path_of("kind"), "unknown spectrum kind '" + kind + "' (power_law | circle | explicit)");
    }
    t.finish();
    return unwrap(hjb::make_spectrum(d), t.path_of("kind"));
}

hjb::QuadraticData parse_quadratic_data(const Table& t, const std::string& key) {
    const auto& v = t.raw(key);
    std::variant<hjb::ConstantRule, hjb::ListRule> rule;
    if (v.is_number()) {
        rule = hjb::ConstantRule{t.number(key)};
    } else {
        rule = hjb::ListRule{t.numbers(key)};
    }
    return unwrap(hjb::make_quadratic_data(rule), t.path_of(key));
}

hjb::Profile1D parse_profile(const Table& t) {
    const auto kind = t.string("kind");
    hjb::Profile1D p = [&] {
        if (kind == "quadratic") return hjb::Profile1D::quadratic(t.number("mu"));
        if (kind == "smooth_abs") return hjb::Profile1D::smooth_abs(t.number("eps"), t.number("scale", 1.0));
        if (kind == "log_cosh") return hjb::Profile1D::log_cosh(t.number("k"));
        if (kind == "constant") return hjb::Profile1D::constant(t.number("c"));
        throw ConfigError(t.path_of("kind"),
                          "unknown profile kind '" + kind + "' (quadratic | smooth_abs | log_cosh | constant)");
    }();
    if (t.has("offset")) p = p.shifted(t.number("offset"));
    t.finish();
    if (!p.convex()) throw ConfigError(t.path_of("kind"), "profile parameters give a nonconvex profile");
    return p;
}

hjb::InitialCondition parse_initial_condition(const Table& t, std::optional<std::size_t>* level) {
    const auto kind = t.string("kind");
    if (level && t.has("level")) *level = t.count("level", 0);
    if (kind == "quadratic") {
        auto data = parse_quadratic_data(t, "mu0");
        t.finish();
        return hjb::DiagonalQuadratic{data};
    }
    if (kind == "separable") {
        const auto& arr = t.raw("profiles");
        if (!arr.is_array() || arr.empty()) throw ConfigError(t.path_of("profiles"), "expected a non-empty array");
        hjb::Separable s;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            s.profiles.push_back(parse_profile(Table(arr[i], t.path_of("profiles") + "[" + std::to_string(i) + "]")));
        }
        t.finish();
        return s;
    }
    throw ConfigError(t.path_of("kind"), "unknown initial condition kind '" + kind + "' (quadratic | separable)");
}

hjb::GridSpec parse_grid(const Table& t) {
    const auto L = t.numbers("half_width");
    if (L.empty() || L.size() > 3) throw ConfigError(t.path_of("half_width"), "grid dimension must be 1, 2 or 3");
    for (double l : L) {
        if (!(l > 0.0)) throw ConfigError(t.path_of("half_width"), "half widths must be positive");
    }
    const double h = t.number("h");
    if (!(h > 0.0)) throw ConfigError(t.path_of("h"), "must be positive");
    const double horizon = t.number("horizon", 1.0);
    if (!(horizon > 0.0)) throw ConfigError(t.path_of("horizon"), "must be positive");
    const auto saves = t.numbers("save_times", {});
    const auto scheme = t.string("scheme", "upwind1");
    hjb::FdScheme fs;
    if (scheme == "upwind1") {
        fs = hjb::FdScheme::Upwind1;
    } else if (scheme == "eno2") {
        fs = hjb::FdScheme::Eno2;
    } else {
        throw ConfigError(t.path_of("scheme"), "unknown scheme '" + scheme + "' (upwind1 | eno2)");
    }
    auto g = hjb::make_grid_spec(L, h, horizon, saves, fs);
    g.dt = t.number("dt", g.dt);
    g.cfl = t.number("cfl", g.cfl);
    g.boundary_margin = t.number("boundary_margin", g.boundary_margin);
    const auto diff = t.string("diffusion", "implicit");
    if (diff == "implicit") {
        g.diffusion = hjb::DiffusionMode::Implicit;
    } else if (diff == "explicit") {
        g.diffusion = hjb::DiffusionMode::Explicit;
    } else {
        throw ConfigError(t.path_of("diffusion"), "unknown diffusion mode '" + diff + "' (implicit | explicit)");
    }
    t.finish();
    return g;
}

hjb::SampleSpec parse_samples(const Table& t, std::size_t dim, std::uint64_t seed) {
    hjb::SampleSpec s;
    s.dim = dim;
    s.seed = seed;
    s.count = t.count("count", s.count);
    s.t_min = t.number("t_min", s.t_min);
    s.t_max = t.number("t_max", s.t_max);
    s.half_width = t.number("half_width", s.half_width);
    if (t.has("times")) s.times = t.numbers("times");
    t.finish();
    return s;
}

hjb::PointRule parse_point_rule(const Table& t) {
    const auto kind = t.string("kind");
    if (kind == "inverse_power") {
        hjb::InversePowerPoint p{t.number("scale", 1.0), t.number("power", 1.0)};
        t.finish();
        return p;
    }
    if (kind == "list") {
        hjb::ListPoint p{t.numbers("values")};
        t.finish();
        return p;
    }
    throw ConfigError(t.path_of("kind"), "unknown point kind '" + kind + "' (inverse_power | list)");
}

hjb::MarketConfig parse_market(const Table& t, std::uint64_t seed) {
    hjb::MarketConfig m;
    m.sites = t.count("sites", m.sites);
    m.sigma = t.number("sigma", m.sigma);
    if (m.sigma < 0.0) throw ConfigError(t.path_of("sigma"), "must be non-negative");
    m.horizon = t.number("horizon", m.horizon);
    m.dt = t.number("dt", m.dt);
    m.paths = t.count("paths", m.paths);
    m.seed = seed;
    if (t.has("mu0")) m.objective = parse_quadratic_data(t, "mu0");
    m.checkpoints = t.numbers("checkpoints", {});
    m.record_paths = t.count("record_paths", 0);
    return m;
}

}  // namespace hjbcli
