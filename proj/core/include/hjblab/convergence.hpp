#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "hjblab/expected.hpp"
#include "hjblab/quadratic.hpp"
#include "hjblab/spectrum.hpp"

namespace hjb {

/// x_i = scale (i + 1)^-power for every i.
struct InversePowerPoint {
    double scale = 1.0;
    double power = 1.0;
};
/// Finitely supported point; coordinates past the list are zero.
struct ListPoint {
    std::vector<double> values;
};
using PointRule = std::variant<InversePowerPoint, ListPoint>;

double point_coordinate(const PointRule& rule, std::size_t i);

struct ConvergenceRow {
    std::size_t level = 0;
    /// phi^N(t, proj_N x).
    double value = 0.0;
    /// |phi^{2N}(t, proj_{2N} x) - phi^N(t, proj_N x)|.
    double cauchy_gap = 0.0;
    /// Certified bound on sum_{i > N} of the c-term and the psi-term.
    double tail_bound = 0.0;
    double c_tail = 0.0;
    double psi_tail = 0.0;
    bool within = true;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    bool gaps_non_increasing = true;
    bool tails_non_increasing = true;
    bool passed = true;
};

/// Galerkin levels of the quadratic solution at a fixed (t, x). Passes iff
/// every gap is within its tail bound plus tol and both columns are
/// non-increasing in N. Levels must be strictly increasing.
Expected<ConvergenceTable> galerkin_convergence(const EigenSpectrum& spectrum, const QuadraticData& data,
                                                const std::vector<std::size_t>& levels, double t,
                                                const PointRule& x, double tol);

}  // namespace hjb
