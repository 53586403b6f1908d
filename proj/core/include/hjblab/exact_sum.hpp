#pragma once

#include <span>
#include <vector>

namespace hjb {

/// Correctly rounded floating-point sum (Shewchuk partials, the algorithm
/// behind Python's math.fsum). The result depends only on the multiset of
/// inputs, never on their order.
class ExactSum {
public:
    void add(double x);
    [[nodiscard]] double value() const;

private:
    std::vector<double> partials_;
};

double exact_sum(std::span<const double> values);

}  // namespace hjb
