#include "hjblab/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hjblab/deterministic.hpp"
#include "hjblab/parallel.hpp"

namespace hjb {

namespace {

constexpr char kMagic[8] = {'H', 'J', 'B', 'F', '0', '0', '0', '1'};

// Flat tensor-grid layout, axis 0 fastest.
struct Layout {
    std::vector<std::size_t> n;
    std::vector<std::size_t> stride;
    std::vector<double> h;
    std::vector<double> L;
    std::size_t total = 1;

    explicit Layout(const GridSpec& g) {
        for (std::size_t a = 0; a < g.dim(); ++a) {
            n.push_back(g.nodes[a]);
            stride.push_back(total);
            total *= g.nodes[a];
            h.push_back(g.spacing(a));
            L.push_back(g.half_width[a]);
        }
    }
    [[nodiscard]] std::size_t dim() const { return n.size(); }
    [[nodiscard]] std::size_t index_on(std::size_t idx, std::size_t a) const { return (idx / stride[a]) % n[a]; }
    [[nodiscard]] double coord(std::size_t a, std::size_t j) const {
        return -L[a] + static_cast<double>(j) * h[a];
    }
    [[nodiscard]] bool on_boundary(std::size_t idx) const {
        for (std::size_t a = 0; a < dim(); ++a) {
            const std::size_t j = index_on(idx, a);
            if (j == 0 || j + 1 == n[a]) return true;
        }
        return false;
    }
};

double eno_pick(double a, double b) { return std::fabs(a) <= std::fabs(b) ? a : b; }

// Dirichlet data psi(t, x) at the boundary nodes.
class BoundaryData {
public:
    BoundaryData(const InitialCondition& phi0, const EigenSpectrum& spectrum, const Layout& layout)
        : phi0_(phi0), spectrum_(spectrum), layout_(layout) {
        for (std::size_t idx = 0; idx < layout.total; ++idx) {
            if (layout.on_boundary(idx)) nodes_.push_back(idx);
        }
        separable_ = !std::holds_alternative<GenericConvex>(phi0);
        if (const auto* s = std::get_if<Separable>(&phi0)) {
            for (std::size_t i = layout.dim(); i < s->profiles.size(); ++i) frozen_ += s->profiles[i].value(0.0);
        }
    }

    [[nodiscard]] const std::vector<std::size_t>& nodes() const { return nodes_; }

    // Writes psi(t) into u at every boundary node.
    Expected<void> apply(double t, std::vector<double>& u) const {
        const std::size_t d = layout_.dim();
        if (separable_) {
            std::vector<std::vector<double>> comp(d);
            for (std::size_t a = 0; a < d; ++a) {
                comp[a].resize(layout_.n[a]);
                // A 1-D boundary is just the two endpoints; faces need every index.
                const std::size_t stride = d == 1 ? layout_.n[a] - 1 : 1;
                for (std::size_t j = 0; j < layout_.n[a]; j += stride) {
                    auto v = mode_value(a, t, layout_.coord(a, j));
                    if (!v) return unexpected(v.error());
                    comp[a][j] = *v;
                }
            }
            for (std::size_t idx : nodes_) {
                double s = frozen_;
                for (std::size_t a = 0; a < d; ++a) s += comp[a][layout_.index_on(idx, a)];
                u[idx] = s;
            }
            return {};
        }
        std::vector<std::optional<Error>> failures(nodes_.size());
        parallel_for(nodes_.size(), [&](std::size_t k) {
            const std::size_t idx = nodes_[k];
            std::vector<double> x(d);
            for (std::size_t a = 0; a < d; ++a) x[a] = layout_.coord(a, layout_.index_on(idx, a));
            if (t == 0.0) {
                u[idx] = ic_value(phi0_, x);
                return;
            }
            auto v = deterministic_value(phi0_, spectrum_, t, TruncatedPoint(std::move(x)));
            if (!v) {
                failures[k] = v.error();
                return;
            }
            u[idx] = *v;
        });
        for (auto& f : failures) {
            if (f) return unexpected(*f);
        }
        return {};
    }

private:
    Expected<double> mode_value(std::size_t a, double t, double x) const {
        if (const auto* q = std::get_if<DiagonalQuadratic>(&phi0_)) {
            const double m = q->data.mu0_at(a);
            return 0.5 * m * x * x / (1.0 + spectrum_.eigenvalue(a) * m * t);
        }
        const auto& s = std::get<Separable>(phi0_);
        if (a >= s.profiles.size()) return 0.0;
        if (t == 0.0) return s.profiles[a].value(x);
        auto r = lax_oleinik_1d(s.profiles[a], spectrum_.eigenvalue(a), t, x);
        if (!r) return unexpected(r.error());
        return r->psi;
    }

    const InitialCondition& phi0_;
    const EigenSpectrum& spectrum_;
    const Layout& layout_;
    std::vector<std::size_t> nodes_;
    bool separable_ = true;
    double frozen_ = 0.0;
};

class Stepper {
public:
    Stepper(const Layout& layout, std::vector<double> lambdas, FdScheme scheme)
        : layout_(layout), lambdas_(std::move(lambdas)), scheme_(scheme) {
        for (std::size_t idx = 0; idx < layout.total; ++idx) {
            if (!layout.on_boundary(idx)) interior_.push_back(idx);
        }
    }

    // Upwind one-sided differences along axis a at node idx.
    void one_sided(const std::vector<double>& u, std::size_t idx, std::size_t a, double& pm, double& pp) const {
        const std::size_t s = layout_.stride[a];
        const double h = layout_.h[a];
        pm = (u[idx] - u[idx - s]) / h;
        pp = (u[idx + s] - u[idx]) / h;
        if (scheme_ != FdScheme::Eno2) return;
        const std::size_t j = layout_.index_on(idx, a);
        const std::size_t n = layout_.n[a];
        const double d2c = (u[idx + s] - 2.0 * u[idx] + u[idx - s]) / (h * h);
        if (j >= 2) {
            const double d2l = (u[idx] - 2.0 * u[idx - s] + u[idx - 2 * s]) / (h * h);
            pm += 0.5 * h * eno_pick(d2l, d2c);
        }
        if (j + 2 < n) {
            const double d2r = (u[idx + 2 * s] - 2.0 * u[idx + s] + u[idx]) / (h * h);
            pp -= 0.5 * h * eno_pick(d2c, d2r);
        }
    }

    // Godunov Hamiltonian sum_a 1/2 lambda_a max(max(p-,0)^2, min(p+,0)^2).
    double hamiltonian(const std::vector<double>& u, std::size_t idx) const {
        double H = 0.0;
        for (std::size_t a = 0; a < layout_.dim(); ++a) {
            double pm = 0.0, pp = 0.0;
            one_sided(u, idx, a, pm, pp);
            const double lo = std::max(pm, 0.0);
            const double hi = std::min(pp, 0.0);
            H += 0.5 * lambdas_[a] * std::max(lo * lo, hi * hi);
        }
        return H;
    }

    // Largest stable explicit step for the Hamiltonian part, from first-order
    // differences; ENO corrections are bounded by the same slopes.
    double cfl_step(const std::vector<double>& u, double cfl) const {
        double rate = 0.0;
        for (std::size_t idx : interior_) {
            double r = 0.0;
            for (std::size_t a = 0; a < layout_.dim(); ++a) {
                const std::size_t s = layout_.stride[a];
                const double p = std::max(std::fabs(u[idx] - u[idx - s]), std::fabs(u[idx + s] - u[idx]));
                r += lambdas_[a] * p / (layout_.h[a] * layout_.h[a]);
            }
            rate = std::max(rate, r);
        }
        return rate > 0.0 ? cfl / rate : std::numeric_limits<double>::infinity();
    }

    // out = u - dt H(u) on interior nodes; boundary nodes copied.
    void hamiltonian_step(const std::vector<double>& u, double dt, std::vector<double>& out) const {
        out = u;
        parallel_for(interior_.size(), [&](std::size_t k) {
            const std::size_t idx = interior_[k];
            out[idx] = u[idx] - dt * hamiltonian(u, idx);
        });
    }

    // SSP-RK2 (Heun) for the Hamiltonian part.
    void hamiltonian_rk2(std::vector<double>& u, double dt) {
        hamiltonian_step(u, dt, stage1_);
        hamiltonian_step(stage1_, dt, stage2_);
        for (std::size_t idx : interior_) u[idx] = 0.5 * (u[idx] + stage2_[idx]);
    }

    // Theta-scheme diffusion along axis a over tau. The boundary entries of
    // `bnd` hold the new Dirichlet values; u's boundary holds the old ones.
    void diffuse_axis(std::vector<double>& u, const std::vector<double>& bnd, std::size_t a, double tau,
                      double theta) const {
        const std::size_t d = layout_.dim();
        const std::size_t n = layout_.n[a];
        const std::size_t s = layout_.stride[a];
        const double r = tau / (layout_.h[a] * layout_.h[a]);

        // Line starts: every node whose index on axis a is 0 and whose other
        // indices are interior.
        std::size_t lines = 1;
        for (std::size_t b = 0; b < d; ++b) {
            if (b != a) lines *= layout_.n[b] - 2;
        }
        parallel_for(lines, [&](std::size_t line) {
            std::size_t rem = line;
            std::size_t base = 0;
            for (std::size_t b = 0; b < d; ++b) {
                if (b == a) continue;
                const std::size_t m = layout_.n[b] - 2;
                base += (rem % m + 1) * layout_.stride[b];
                rem /= m;
            }
            std::vector<double> rhs(n), cprime(n);
            for (std::size_t j = 1; j + 1 < n; ++j) {
                const std::size_t idx = base + j * s;
                rhs[j] = u[idx] + (1.0 - theta) * r * (u[idx - s] - 2.0 * u[idx] + u[idx + s]);
            }
            const double left = bnd[base];
            const double right = bnd[base + (n - 1) * s];
            rhs[1] += theta * r * left;
            rhs[n - 2] += theta * r * right;
            // Thomas algorithm for diag 1 + 2 theta r, off-diagonals -theta r.
            const double diag = 1.0 + 2.0 * theta * r;
            const double off = -theta * r;
            double denom = diag;
            cprime[1] = off / denom;
            rhs[1] /= denom;
            for (std::size_t j = 2; j + 1 < n; ++j) {
                denom = diag - off * cprime[j - 1];
                cprime[j] = off / denom;
                rhs[j] = (rhs[j] - off * rhs[j - 1]) / denom;
            }
            for (std::size_t j = n - 2; j >= 2; --j) rhs[j - 1] -= cprime[j - 1] * rhs[j];
            for (std::size_t j = 1; j + 1 < n; ++j) u[base + j * s] = rhs[j];
            u[base] = left;
            u[base + (n - 1) * s] = right;
        });
    }

    void set_boundary(std::vector<double>& u, const std::vector<double>& bnd,
                      const std::vector<std::size_t>& nodes) const {
        for (std::size_t idx : nodes) u[idx] = bnd[idx];
    }

private:
    const Layout& layout_;
    std::vector<double> lambdas_;
    FdScheme scheme_;
    std::vector<std::size_t> interior_;
    std::vector<double> stage1_, stage2_;
};

Expected<void> validate(const InitialCondition& phi0, const EigenSpectrum& spectrum, std::size_t dim,
                        const GridSpec& g) {
    if (dim < 1 || dim > 3) return unexpected(ErrorCode::InvalidArgument, "grid solver supports 1 to 3 dimensions");
    if (g.nodes.size() != dim || g.half_width.size() != dim) {
        return unexpected(ErrorCode::InvalidArgument, "grid spec axis count does not match dim");
    }
    if (!spectrum.supports(dim)) return unexpected(ErrorCode::InvalidArgument, "spectrum has fewer modes than dim");
    for (std::size_t a = 0; a < dim; ++a) {
        if (g.nodes[a] < 11 || g.nodes[a] % 2 == 0) {
            return unexpected(ErrorCode::InvalidArgument, "node counts must be odd and at least 11");
        }
        if (!(g.half_width[a] > 0.0)) return unexpected(ErrorCode::InvalidArgument, "half-widths must be positive");
    }
    if (!(g.dt > 0.0) || !(g.horizon > 0.0) || !(g.cfl > 0.0 && g.cfl <= 1.0)) {
        return unexpected(ErrorCode::InvalidArgument, "dt, horizon and cfl must be positive (cfl <= 1)");
    }
    for (double s : g.save_times) {
        if (s < 0.0 || s > g.horizon) return unexpected(ErrorCode::InvalidArgument, "save time outside [0, horizon]");
    }
    if (!ic_is_convex(phi0)) return unexpected(ErrorCode::NonConvex, "grid solver requires convex phi0");
    if (g.diffusion == DiffusionMode::Explicit) {
        double hmin2 = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < dim; ++a) hmin2 = std::min(hmin2, g.spacing(a) * g.spacing(a));
        if (g.dt > hmin2 / (2.0 * static_cast<double>(dim))) {
            return unexpected(ErrorCode::Stability, "explicit diffusion requires dt <= h^2 / (2 dim)");
        }
    }
    return {};
}

}  // namespace

GridSpec make_grid_spec(std::vector<double> half_width, double h, double horizon, std::vector<double> save_times,
                        FdScheme scheme) {
    GridSpec g;
    for (double L : half_width) {
        auto cells = static_cast<std::size_t>(std::llround(2.0 * L / h));
        if (cells % 2 == 1) ++cells;
        g.nodes.push_back(cells + 1);
        g.half_width.push_back(0.5 * static_cast<double>(cells) * h);
    }
    g.horizon = horizon;
    g.save_times = std::move(save_times);
    g.dt = horizon;
    g.scheme = scheme;
    return g;
}

Expected<GridField> solve_fd(const InitialCondition& phi0, const EigenSpectrum& spectrum, std::size_t dim,
                             const GridSpec& grid) {
    if (auto ok = validate(phi0, spectrum, dim, grid); !ok) return unexpected(ok.error());
    const Layout layout(grid);

    GridField field;
    field.spec_ = grid;
    field.lambdas_ = spectrum.eigenvalues(dim);
    field.description_ = ic_describe(phi0) + " on " + spectrum.describe();

    std::vector<double> u(layout.total);
    std::vector<double> x(dim);
    for (std::size_t idx = 0; idx < layout.total; ++idx) {
        for (std::size_t a = 0; a < dim; ++a) x[a] = layout.coord(a, layout.index_on(idx, a));
        u[idx] = ic_value(phi0, x);
    }

    const BoundaryData boundary(phi0, spectrum, layout);
    {
        const std::vector<double> centre(dim, 0.0);
        const double c = ic_value(phi0, centre);
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t idx : boundary.nodes()) worst = std::min(worst, u[idx] - c);
        if (worst < grid.boundary_margin) {
            return unexpected(ErrorCode::BoundaryMargin,
                              "phi0 on the grid boundary exceeds its centre value by less than the margin");
        }
    }

    std::vector<double> saves = grid.save_times;
    saves.push_back(grid.horizon);
    std::sort(saves.begin(), saves.end());
    saves.erase(std::unique(saves.begin(), saves.end(),
                            [](double a, double b) { return std::fabs(a - b) <= 1e-14 * (1.0 + std::fabs(b)); }),
                saves.end());

    Stepper stepper(layout, field.lambdas_, grid.scheme);
    std::vector<double> bnd(layout.total, 0.0), prev, work;
    const bool implicit = grid.diffusion == DiffusionMode::Implicit;
    const double theta_full = implicit ? 1.0 : 0.0;
    const double theta_half = implicit ? 0.5 : 0.0;

    double t = 0.0;
    std::size_t next_save = 0;
    const auto store = [&](double time, const std::vector<double>* before, double last_dt) {
        field.times_.push_back(time);
        field.slices_.push_back(u);
        std::vector<double> du(layout.total, std::numeric_limits<double>::quiet_NaN());
        if (before) {
            for (std::size_t i = 0; i < layout.total; ++i) du[i] = (u[i] - (*before)[i]) / last_dt;
        }
        field.dslices_.push_back(std::move(du));
    };
    if (saves.front() == 0.0) {
        store(0.0, nullptr, 0.0);
        ++next_save;
    }

    while (next_save < saves.size()) {
        const double target = saves[next_save];
        double dt = std::min(grid.dt, stepper.cfl_step(u, grid.cfl));
        if (!(dt > 0.0) || !std::isfinite(dt)) dt = grid.dt;
        bool lands = false;
        if (t + dt >= target - 1e-14 * (1.0 + target)) {
            dt = target - t;
            lands = true;
        }
        if (dt < 1e-14) return unexpected(ErrorCode::Stability, "time step collapsed");
        if (lands) prev = u;

        if (grid.scheme == FdScheme::Upwind1) {
            stepper.hamiltonian_step(u, dt, work);
            u.swap(work);
            if (auto ok = boundary.apply(t + dt, bnd); !ok) return unexpected(ok.error());
            for (std::size_t a = 0; a < dim; ++a) stepper.diffuse_axis(u, bnd, a, dt, theta_full);
        } else {
            if (auto ok = boundary.apply(t + 0.5 * dt, bnd); !ok) return unexpected(ok.error());
            for (std::size_t a = 0; a < dim; ++a) stepper.diffuse_axis(u, bnd, a, 0.5 * dt, theta_half);
            stepper.hamiltonian_rk2(u, dt);
            if (auto ok = boundary.apply(t + dt, bnd); !ok) return unexpected(ok.error());
            for (std::size_t a = dim; a-- > 0;) stepper.diffuse_axis(u, bnd, a, 0.5 * dt, theta_half);
        }
        stepper.set_boundary(u, bnd, boundary.nodes());
        for (double v : u) {
            if (!std::isfinite(v)) return unexpected(ErrorCode::Stability, "grid solution became non-finite");
        }
        t = lands ? target : t + dt;
        ++field.steps_;
        if (lands) {
            store(t, &prev, dt);
            ++next_save;
        }
    }
    return field;
}

std::size_t GridField::node_count() const noexcept {
    std::size_t n = 1;
    for (std::size_t k : spec_.nodes) n *= k;
    return n;
}

double GridField::coordinate(std::size_t axis, std::size_t j) const {
    return -spec_.half_width[axis] + static_cast<double>(j) * spec_.spacing(axis);
}

bool GridField::contains(std::span<const double> x, double margin) const {
    if (x.size() != dim()) return false;
    for (std::size_t a = 0; a < dim(); ++a) {
        const double L = spec_.half_width[a];
        if (!(x[a] >= -L + margin - 1e-12 && x[a] <= L - margin + 1e-12)) return false;
    }
    return true;
}

Expected<double> GridField::interpolate(const std::vector<double>& data, std::span<const double> x) const {
    if (!contains(x, 0.0)) return unexpected(ErrorCode::OutOfDomain, "query point outside the grid");
    const std::size_t d = dim();
    std::array<std::size_t, 3> base{};
    std::array<std::array<double, 4>, 3> w{};
    std::array<std::size_t, 3> stride{};
    std::size_t st = 1;
    for (std::size_t a = 0; a < d; ++a) {
        stride[a] = st;
        st *= spec_.nodes[a];
        const double h = spec_.spacing(a);
        const double s = (x[a] + spec_.half_width[a]) / h;
        const auto n = static_cast<long>(spec_.nodes[a]);
        long j0 = static_cast<long>(std::floor(s)) - 1;
        j0 = std::clamp(j0, 0L, n - 4);
        base[a] = static_cast<std::size_t>(j0);
        const double r = s - static_cast<double>(j0);  // local coordinate, nodes at 0..3
        w[a][0] = -(r - 1.0) * (r - 2.0) * (r - 3.0) / 6.0;
        w[a][1] = r * (r - 2.0) * (r - 3.0) / 2.0;
        w[a][2] = -r * (r - 1.0) * (r - 3.0) / 2.0;
        w[a][3] = r * (r - 1.0) * (r - 2.0) / 6.0;
    }
    double v = 0.0;
    const std::size_t corners = d == 1 ? 4 : (d == 2 ? 16 : 64);
    for (std::size_t c = 0; c < corners; ++c) {
        std::size_t idx = 0;
        double weight = 1.0;
        std::size_t rem = c;
        for (std::size_t a = 0; a < d; ++a) {
            const std::size_t k = rem % 4;
            rem /= 4;
            idx += (base[a] + k) * stride[a];
            weight *= w[a][k];
        }
        v += weight * data[idx];
    }
    return v;
}

Expected<std::size_t> GridField::slice_index(double t) const {
    for (std::size_t k = 0; k < times_.size(); ++k) {
        if (std::fabs(times_[k] - t) <= 1e-12 * (1.0 + std::fabs(t))) return k;
    }
    return unexpected(ErrorCode::OutOfDomain, "time is not a stored slice");
}

Expected<double> GridField::value(double t, std::span<const double> x) const {
    if (times_.empty()) return unexpected(ErrorCode::OutOfDomain, "field has no slices");
    if (auto k = slice_index(t)) return interpolate(slices_[*k], x);
    if (t < times_.front() || t > times_.back()) return unexpected(ErrorCode::OutOfDomain, "time outside stored range");
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t k1 = static_cast<std::size_t>(it - times_.begin());
    const std::size_t k0 = k1 - 1;
    auto v0 = interpolate(slices_[k0], x);
    if (!v0) return v0;
    auto v1 = interpolate(slices_[k1], x);
    if (!v1) return v1;
    const double s = (t - times_[k0]) / (times_[k1] - times_[k0]);
    return (1.0 - s) * *v0 + s * *v1;
}

Expected<double> GridField::time_derivative(double t, std::span<const double> x) const {
    auto k = slice_index(t);
    if (!k) return unexpected(k.error());
    auto v = interpolate(dslices_[*k], x);
    if (v && !std::isfinite(*v)) return unexpected(ErrorCode::OutOfDomain, "no time derivative stored at t = 0");
    return v;
}

namespace {

void write_le_doubles(std::ostream& os, const std::vector<double>& v) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        for (double d : v) {
            auto bits = std::bit_cast<std::uint64_t>(d);
            char b[8];
            for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
            os.write(b, 8);
        }
    }
}

bool read_le_doubles(std::istream& is, std::vector<double>& v) {
    std::vector<unsigned char> raw(v.size() * 8);
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) return false;
    for (std::size_t k = 0; k < v.size(); ++k) {
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(raw[8 * k + i]) << (8 * i);
        v[k] = std::bit_cast<double>(bits);
    }
    return true;
}

const char* scheme_name(FdScheme s) { return s == FdScheme::Upwind1 ? "upwind1" : "eno2"; }

}  // namespace

Expected<void> GridField::write_binary(std::ostream& os) const {
    nlohmann::json h;
    h["format"] = "hjbf";
    h["version"] = 1;
    h["byte_order"] = "little";
    h["dim"] = dim();
    h["half_width"] = spec_.half_width;
    h["nodes"] = spec_.nodes;
    h["eigenvalues"] = lambdas_;
    h["description"] = description_;
    h["solver"] = {{"scheme", scheme_name(spec_.scheme)},
                   {"diffusion", spec_.diffusion == DiffusionMode::Implicit ? "implicit" : "explicit"},
                   {"dt", spec_.dt},
                   {"horizon", spec_.horizon},
                   {"cfl", spec_.cfl},
                   {"steps", steps_}};
    const std::size_t bytes = node_count() * sizeof(double);
    nlohmann::json slices = nlohmann::json::array();
    for (std::size_t k = 0; k < times_.size(); ++k) {
        slices.push_back({{"time", times_[k]}, {"value_offset", 2 * k * bytes}, {"dt_offset", (2 * k + 1) * bytes}});
    }
    h["slices"] = slices;
    const std::string header = h.dump();
    os.write(kMagic, sizeof kMagic);
    const auto len = static_cast<std::uint64_t>(header.size());
    char lb[8];
    for (int i = 0; i < 8; ++i) lb[i] = static_cast<char>((len >> (8 * i)) & 0xFF);
    os.write(lb, 8);
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (std::size_t k = 0; k < times_.size(); ++k) {
        write_le_doubles(os, slices_[k]);
        write_le_doubles(os, dslices_[k]);
    }
    if (!os) return unexpected(ErrorCode::Io, "failed to write field container");
    return {};
}

Expected<GridField> GridField::read_binary(std::istream& is) {
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        return unexpected(ErrorCode::Parse, "not a field container (bad magic)");
    }
    unsigned char lb[8];
    if (!is.read(reinterpret_cast<char*>(lb), 8)) return unexpected(ErrorCode::Parse, "truncated header length");
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(lb[i]) << (8 * i);
    std::string header(len, '\0');
    if (!is.read(header.data(), static_cast<std::streamsize>(len))) return unexpected(ErrorCode::Parse, "truncated header");
    GridField f;
    try {
        const auto h = nlohmann::json::parse(header);
        f.spec_.half_width = h.at("half_width").get<std::vector<double>>();
        f.spec_.nodes = h.at("nodes").get<std::vector<std::size_t>>();
        f.lambdas_ = h.at("eigenvalues").get<std::vector<double>>();
        f.description_ = h.at("description").get<std::string>();
        const auto& s = h.at("solver");
        f.spec_.scheme = s.at("scheme").get<std::string>() == "eno2" ? FdScheme::Eno2 : FdScheme::Upwind1;
        f.spec_.diffusion =
            s.at("diffusion").get<std::string>() == "explicit" ? DiffusionMode::Explicit : DiffusionMode::Implicit;
        f.spec_.dt = s.at("dt").get<double>();
        f.spec_.horizon = s.at("horizon").get<double>();
        f.spec_.cfl = s.at("cfl").get<double>();
        f.steps_ = s.at("steps").get<std::size_t>();
        for (const auto& sl : h.at("slices")) f.times_.push_back(sl.at("time").get<double>());
    } catch (const std::exception& e) {
        return unexpected(ErrorCode::Parse, std::string("bad field header: ") + e.what());
    }
    f.spec_.save_times = f.times_;
    const std::size_t n = f.node_count();
    for (std::size_t k = 0; k < f.times_.size(); ++k) {
        std::vector<double> v(n), d(n);
        if (!read_le_doubles(is, v) || !read_le_doubles(is, d)) {
            return unexpected(ErrorCode::Parse, "truncated slice data");
        }
        f.slices_.push_back(std::move(v));
        f.dslices_.push_back(std::move(d));
    }
    return f;
}

Expected<void> GridField::write_csv(std::ostream& os, std::size_t k) const {
    if (k >= times_.size()) return unexpected(ErrorCode::OutOfDomain, "slice index out of range");
    const std::size_t d = dim();
    for (std::size_t a = 0; a < d; ++a) os << "x" << a << ",";
    os << "t,value,time_derivative\n";
    os << std::setprecision(17);
    const std::size_t n = node_count();
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::size_t rem = idx;
        for (std::size_t a = 0; a < d; ++a) {
            os << coordinate(a, rem % spec_.nodes[a]) << ",";
            rem /= spec_.nodes[a];
        }
        os << times_[k] << "," << slices_[k][idx] << "," << dslices_[k][idx] << "\n";
    }
    if (!os) return unexpected(ErrorCode::Io, "failed to write CSV");
    return {};
}

std::uint64_t point_hash(std::span<const double> x) {
    std::uint64_t h = 14695981039346656037ULL;
    for (double v : x) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xFF;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

}  // namespace hjb
