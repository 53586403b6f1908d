#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hjblab/expected.hpp"
#include "hjblab/quadratic.hpp"

namespace hjb {

/// A one-dimensional profile f with derivatives, used as one factor of a
/// separable initial condition sum_i f_i(x_i).
class Profile1D {
public:
    using Fn = std::function<double(double)>;

    Profile1D(std::string name, Fn value, Fn derivative, Fn second_derivative, bool convex,
              double infimum, double curvature_sup);

    /// 1/2 mu y^2.
    static Profile1D quadratic(double mu);
    /// scale * sqrt(y^2 + eps^2): a C^{1,1} convex stand-in for scale*|y|.
    static Profile1D smooth_abs(double eps, double scale = 1.0);
    /// log(cosh(k y)) / k.
    static Profile1D log_cosh(double k);
    static Profile1D constant(double c);

    /// The same profile plus a constant.
    [[nodiscard]] Profile1D shifted(double offset) const;

    [[nodiscard]] double value(double y) const { return value_(y) + offset_; }
    [[nodiscard]] double derivative(double y) const { return derivative_(y); }
    [[nodiscard]] double second_derivative(double y) const { return second_(y); }
    [[nodiscard]] bool convex() const noexcept { return convex_; }
    [[nodiscard]] double infimum() const noexcept { return infimum_ + offset_; }
    /// sup |f''|, the C^{1,1} constant of the profile.
    [[nodiscard]] double curvature_sup() const noexcept { return curvature_sup_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] double offset() const noexcept { return offset_; }

private:
    std::string name_;
    Fn value_;
    Fn derivative_;
    Fn second_;
    bool convex_ = true;
    double infimum_ = 0.0;
    double curvature_sup_ = 0.0;
    double offset_ = 0.0;
};

struct DiagonalQuadratic {
    QuadraticData data;
};

struct Separable {
    std::vector<Profile1D> profiles;
};

/// Arbitrary initial data given by callables plus the metadata the solvers
/// rely on. Flags are declarations; probe_convexity and probe_coercivity
/// check them empirically.
struct GenericConvex {
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> gradient;
    bool convex = true;
    bool coercive = true;
    double lower_bound = 0.0;
    std::optional<double> lipschitz_gradient;
};

using InitialCondition = std::variant<DiagonalQuadratic, Separable, GenericConvex>;

double ic_value(const InitialCondition& ic, std::span<const double> x);
void ic_gradient(const InitialCondition& ic, std::span<const double> x, std::span<double> out);
bool ic_is_convex(const InitialCondition& ic);
/// inf over H of phi_0.
double ic_infimum(const InitialCondition& ic);
/// Per-mode bound on phi_ii, used both as a preconditioner and as the
/// phi^0_ii of the second-derivative estimate. Nullopt entries mean unknown.
std::vector<std::optional<double>> ic_curvature_bounds(const InitialCondition& ic, std::size_t n);
/// Bound on the C^{1,1} norm of phi_0 over the first n modes, if known.
std::optional<double> ic_c11_constant(const InitialCondition& ic, std::size_t n);
std::string ic_describe(const InitialCondition& ic);

struct ProbeReport {
    bool passed = true;
    double worst_margin = 0.0;
    std::size_t probes = 0;
};

/// Midpoint convexity f((x+y)/2) <= (f(x)+f(y))/2 + 1e-10 on random pairs
/// in [-radius, radius]^dim.
ProbeReport probe_convexity(const InitialCondition& ic, std::size_t dim, double radius, std::size_t pairs,
                            std::uint64_t seed);

/// Checks that phi_0 along random rays exceeds `threshold` above phi_0(0)
/// before the ray length reaches max_radius.
ProbeReport probe_coercivity(const InitialCondition& ic, std::size_t dim, std::size_t rays, double threshold,
                             double max_radius, std::uint64_t seed);

}  // namespace hjb
