#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hjblab/expected.hpp"
#include "hjblab/spectrum.hpp"

namespace hjb {

struct SamplePoint {
    double t = 0.0;
    TruncatedPoint x;
};

struct SampleSpec {
    std::size_t dim = 1;
    double t_min = 0.1;
    double t_max = 1.0;
    /// When set, every point is repeated at each of these times and t_min,
    /// t_max are ignored (grid fields only carry derivatives at stored times).
    std::optional<std::vector<double>> times;
    double half_width = 2.0;
    /// Spatial points (per time when `times` is set).
    std::size_t count = 64;
    std::uint64_t seed = 0;
};

struct SampleSet {
    std::vector<SamplePoint> points;
    std::string description;
};

/// Halton points with a seeded Cranley-Patterson rotation, mapped to
/// [t_min, t_max] x [-half_width, half_width]^dim.
Expected<SampleSet> make_samples(const SampleSpec& spec);

/// The k-th radical inverse of n in the k-th prime base.
double radical_inverse(std::size_t prime_index, std::uint64_t n);

}  // namespace hjb
