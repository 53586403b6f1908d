#include "hjblab/sampling.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace hjb {

namespace {

constexpr std::size_t kMaxBases = 1024;

// First kMaxBases primes; static initialization is thread-safe.
const std::vector<std::uint64_t>& primes() {
    static const std::vector<std::uint64_t> table = [] {
        std::vector<std::uint64_t> out{2};
        for (std::uint64_t c = 3; out.size() < kMaxBases; c += 2) {
            bool prime = true;
            for (std::uint64_t p : out) {
                if (p * p > c) break;
                if (c % p == 0) {
                    prime = false;
                    break;
                }
            }
            if (prime) out.push_back(c);
        }
        return out;
    }();
    return table;
}

}  // namespace

double radical_inverse(std::size_t prime_index, std::uint64_t n) {
    const auto base = primes().at(prime_index);
    const double inv = 1.0 / static_cast<double>(base);
    double f = inv, r = 0.0;
    while (n > 0) {
        r += f * static_cast<double>(n % base);
        n /= base;
        f *= inv;
    }
    return r;
}

Expected<SampleSet> make_samples(const SampleSpec& spec) {
    if (spec.dim == 0 || spec.count == 0) return unexpected(ErrorCode::InvalidArgument, "empty sample set");
    if (!(spec.half_width >= 0.0)) return unexpected(ErrorCode::InvalidArgument, "half_width must be >= 0");
    const bool lattice = spec.times.has_value();
    if (!lattice && !(spec.t_min > 0.0 && spec.t_max >= spec.t_min)) {
        return unexpected(ErrorCode::InvalidArgument, "requires 0 < t_min <= t_max");
    }
    const std::size_t coords = spec.dim + (lattice ? 0 : 1);
    if (coords > kMaxBases) return unexpected(ErrorCode::InvalidArgument, "too many sample coordinates");

    // Top 53 bits of mt19937_64: identical on every standard library.
    std::mt19937_64 rng(spec.seed);
    std::vector<double> shift(coords);
    for (auto& s : shift) s = static_cast<double>(rng() >> 11) * 0x1.0p-53;

    std::vector<std::vector<double>> unit(spec.count, std::vector<double>(coords));
    for (std::size_t n = 0; n < spec.count; ++n) {
        for (std::size_t k = 0; k < coords; ++k) {
            const double v = radical_inverse(k, n + 1) + shift[k];
            unit[n][k] = v - std::floor(v);
        }
    }

    SampleSet set;
    std::ostringstream desc;
    const auto to_x = [&](const std::vector<double>& p, std::size_t offset) {
        std::vector<double> x(spec.dim);
        for (std::size_t i = 0; i < spec.dim; ++i) x[i] = spec.half_width * (2.0 * p[offset + i] - 1.0);
        return TruncatedPoint(std::move(x));
    };
    if (lattice) {
        for (double t : *spec.times) {
            for (const auto& p : unit) set.points.push_back(SamplePoint{t, to_x(p, 0)});
        }
        desc << "halton " << spec.count << " points x " << spec.times->size() << " times in [-" << spec.half_width
             << "," << spec.half_width << "]^" << spec.dim << ", seed " << spec.seed;
    } else {
        for (const auto& p : unit) {
            set.points.push_back(SamplePoint{spec.t_min + (spec.t_max - spec.t_min) * p[0], to_x(p, 1)});
        }
        desc << "halton " << spec.count << " points in [" << spec.t_min << "," << spec.t_max << "] x [-"
             << spec.half_width << "," << spec.half_width << "]^" << spec.dim << ", seed " << spec.seed;
    }
    set.description = desc.str();
    return set;
}

}  // namespace hjb
