#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hjblab/expected.hpp"
#include "hjblab/initial_condition.hpp"
#include "hjblab/spectrum.hpp"

namespace hjb {

enum class FdScheme {
    /// First-order Godunov upwinding, IMEX Euler: monotone.
    Upwind1,
    /// Second-order ENO gradients, SSP-RK2 Hamiltonian step inside a
    /// Strang splitting with Crank-Nicolson diffusion half steps.
    Eno2,
};

enum class DiffusionMode { Implicit, Explicit };

struct GridSpec {
    /// Per-axis half-width L; the axis spans [-L, L].
    std::vector<double> half_width;
    /// Per-axis node count, odd and at least 11.
    std::vector<std::size_t> nodes;
    /// Largest time step; the CFL condition may shrink it.
    double dt = 1e-3;
    double horizon = 1.0;
    /// Times at which slices are stored; the horizon is always stored.
    std::vector<double> save_times;
    double cfl = 0.5;
    FdScheme scheme = FdScheme::Upwind1;
    DiffusionMode diffusion = DiffusionMode::Implicit;
    /// Required min over the boundary of phi0 minus phi0 at the centre.
    double boundary_margin = 0.0;

    [[nodiscard]] std::size_t dim() const noexcept { return nodes.size(); }
    [[nodiscard]] double spacing(std::size_t axis) const {
        return 2.0 * half_width[axis] / static_cast<double>(nodes[axis] - 1);
    }
};

/// Grid-backed solution: values on a tensor grid at the stored times, plus
/// the backward time difference over the last step before each stored time.
class GridField {
public:
    [[nodiscard]] std::size_t dim() const noexcept { return spec_.dim(); }
    [[nodiscard]] const GridSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] const std::vector<double>& slice(std::size_t k) const { return slices_.at(k); }
    [[nodiscard]] const std::vector<double>& slice_time_derivative(std::size_t k) const { return dslices_.at(k); }
    [[nodiscard]] const std::vector<double>& eigenvalues() const noexcept { return lambdas_; }
    [[nodiscard]] std::size_t node_count() const noexcept;
    [[nodiscard]] double coordinate(std::size_t axis, std::size_t j) const;
    [[nodiscard]] std::size_t steps_taken() const noexcept { return steps_; }
    [[nodiscard]] const std::string& description() const noexcept { return description_; }

    /// Cubic Lagrange interpolation in space, linear in time between slices.
    Expected<double> value(double t, std::span<const double> x) const;
    /// Interpolated backward time difference; t must be a stored time.
    Expected<double> time_derivative(double t, std::span<const double> x) const;
    /// True if x +- margin along every axis stays inside the grid.
    [[nodiscard]] bool contains(std::span<const double> x, double margin) const;

    /// Serializes to the binary container: magic, u64 header length, JSON
    /// header, then little-endian f64 slices (values then time derivatives).
    Expected<void> write_binary(std::ostream& os) const;
    static Expected<GridField> read_binary(std::istream& is);
    /// One row per node of slice k: coordinates, value, time derivative.
    Expected<void> write_csv(std::ostream& os, std::size_t k) const;

private:
    friend Expected<GridField> solve_fd(const InitialCondition&, const EigenSpectrum&, std::size_t, const GridSpec&);

    Expected<double> interpolate(const std::vector<double>& data, std::span<const double> x) const;
    Expected<std::size_t> slice_index(double t) const;

    GridSpec spec_;
    std::vector<double> lambdas_;
    std::vector<double> times_;
    std::vector<std::vector<double>> slices_;
    std::vector<std::vector<double>> dslices_;
    std::size_t steps_ = 0;
    std::string description_;
};

/// Solves phi_t = Laplacian phi - 1/2 sum_{i<dim} lambda_i phi_i^2 on the
/// grid, with Dirichlet data from the deterministic value psi.
Expected<GridField> solve_fd(const InitialCondition& phi0, const EigenSpectrum& spectrum, std::size_t dim,
                             const GridSpec& grid);

/// Square grid of half-width L and spacing h in every axis.
GridSpec make_grid_spec(std::vector<double> half_width, double h, double horizon, std::vector<double> save_times,
                        FdScheme scheme = FdScheme::Upwind1);

/// FNV-1a 64 of the little-endian bytes of the coordinates.
std::uint64_t point_hash(std::span<const double> x);

}  // namespace hjb
