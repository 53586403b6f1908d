#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hjblab/cole_hopf.hpp"
#include "hjblab/expected.hpp"
#include "hjblab/grid.hpp"
#include "hjblab/quadratic.hpp"

namespace hjb {

struct ClosedFormQuadratic {
    QuadraticSolution solution;
};

struct SeparableOracle {
    std::vector<Profile1D> profiles;
    EigenSpectrum spectrum;
    QuadratureConfig quad;
};

struct GridBacked {
    std::shared_ptr<const GridField> grid;
    /// Step of the centred differences taken on the interpolant; the grid
    /// spacing of axis 0 when unset.
    std::optional<double> h_fd;
};

enum class QueryKind { Value, Gradient, HessianEntry, TimeDerivative };

struct FieldQuery {
    QueryKind kind = QueryKind::Value;
    std::size_t i = 0;
    std::size_t j = 0;
};

/// Evaluable phi^N(t, .) with a common query surface over closed-form,
/// tensorized-oracle and grid representations.
class SolutionField {
public:
    using Repr = std::variant<ClosedFormQuadratic, SeparableOracle, GridBacked>;

    explicit SolutionField(Repr repr) : repr_(std::move(repr)) {}

    [[nodiscard]] const Repr& repr() const noexcept { return repr_; }
    [[nodiscard]] std::string kind_name() const;
    /// Number of coordinates a query point must have; nullopt when any level works.
    [[nodiscard]] std::optional<std::size_t> fixed_dim() const;
    /// lambda_i of the underlying operator.
    [[nodiscard]] double eigenvalue(std::size_t i) const;

    Expected<double> value(double t, const TruncatedPoint& x) const;
    Expected<std::vector<double>> gradient(double t, const TruncatedPoint& x) const;
    Expected<double> hessian_entry(double t, const TruncatedPoint& x, std::size_t i, std::size_t j) const;
    Expected<double> time_derivative(double t, const TruncatedPoint& x) const;
    Expected<ScalarOrVector> query(double t, const TruncatedPoint& x, const FieldQuery& q) const;

private:
    Repr repr_;
};

}  // namespace hjb
