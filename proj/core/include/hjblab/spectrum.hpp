#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hjblab/expected.hpp"

namespace hjb {

/// A point of the truncated space H_N, written in the eigenbasis of A.
/// Level N means coordinates x_0..x_N.
struct TruncatedPoint {
    std::vector<double> coords;

    TruncatedPoint() = default;
    explicit TruncatedPoint(std::vector<double> c) : coords(std::move(c)) {}
    TruncatedPoint(std::initializer_list<double> c) : coords(c) {}

    [[nodiscard]] std::size_t size() const noexcept { return coords.size(); }
    /// Level of the truncation, size() - 1. Undefined for an empty point.
    [[nodiscard]] std::size_t level() const noexcept { return coords.size() - 1; }
    [[nodiscard]] bool all_finite() const noexcept;
    double operator[](std::size_t i) const { return coords[i]; }
    double& operator[](std::size_t i) { return coords[i]; }
};

struct PowerLawSpec {
    double alpha = 2.0;
};
struct CircleSpec {
    std::size_t sites = 16;
};
struct ExplicitSpec {
    std::vector<double> values;
};
using SpectrumDescriptor = std::variant<PowerLawSpec, CircleSpec, ExplicitSpec>;

enum class SpectrumKind { PowerLaw, Circle, Explicit };

/// Eigenvalues of the operator A, non-decreasing and repeated according to
/// multiplicity. Power-law spectra are unbounded; circle and explicit
/// spectra have a finite number of modes.
class EigenSpectrum {
public:
    [[nodiscard]] SpectrumKind kind() const noexcept { return kind_; }
    [[nodiscard]] const SpectrumDescriptor& descriptor() const noexcept { return descriptor_; }

    /// Number of available modes; nullopt for unbounded power-law spectra.
    [[nodiscard]] std::optional<std::size_t> capacity() const noexcept;
    [[nodiscard]] bool supports(std::size_t n_modes) const noexcept;

    /// lambda_i. Precondition: i < capacity().
    [[nodiscard]] double eigenvalue(std::size_t i) const;
    [[nodiscard]] std::vector<double> eigenvalues(std::size_t n) const;

    /// Exponent of the power-law kind (zero otherwise).
    [[nodiscard]] double alpha() const noexcept { return alpha_; }

    [[nodiscard]] std::string describe() const;

private:
    friend Expected<EigenSpectrum> make_spectrum(const SpectrumDescriptor& descriptor);

    SpectrumKind kind_ = SpectrumKind::Explicit;
    SpectrumDescriptor descriptor_;
    double alpha_ = 0.0;
    std::vector<double> table_;  // circle and explicit kinds
};

/// Validates a descriptor and builds the spectrum. Rejects alpha <= 1,
/// fewer than two circle sites, empty, non-positive or decreasing lists.
Expected<EigenSpectrum> make_spectrum(const SpectrumDescriptor& descriptor);

/// Eigenvalue 1 + 4 N^2 sin^2(pi k / N) of I - N^2 Delta_disc for the
/// Fourier frequency k on N periodic sites.
double circle_frequency_eigenvalue(std::size_t sites, std::size_t frequency);

enum class TailKind { IntegralBound, ExactRemainder };

struct SummabilityReport {
    std::size_t terms_used = 0;
    double partial_sum = 0.0;
    double tail_bound = 0.0;
    TailKind tail_kind = TailKind::ExactRemainder;
    bool converges = true;
};

/// Partial sum of log(1 + lambda_i) / lambda_i over the first n_terms modes,
/// with an integral tail majorant for power laws and the exact remainder for
/// finite spectra.
Expected<SummabilityReport> summability_report(const EigenSpectrum& spectrum, std::size_t n_terms);

enum class OperatorKind { A, AInverse, B, BSquared };

/// Diagonal action of A, A^-1, B = A^-1/2 or B^2 on the eigen-coordinates.
Expected<TruncatedPoint> apply_operator(const EigenSpectrum& spectrum, OperatorKind which,
                                        const TruncatedPoint& point);

/// <A^-1 x, x> over the coordinates of x.
double inverse_metric(const EigenSpectrum& spectrum, std::span<const double> x);
/// <A x, x> over the coordinates of x.
double forward_metric(const EigenSpectrum& spectrum, std::span<const double> x);

}  // namespace hjb
