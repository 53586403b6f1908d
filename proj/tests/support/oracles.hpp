#pragma once

// Reference computations used only by the tests. Each one takes a different
// route from the library code it checks: long double accumulation, brute
// force search, dense matrices or composite Simpson quadrature.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

inline long double riccati(long double mu0, long double lambda, long double t) {
    return mu0 / (1.0L + lambda * mu0 * t);
}

/// Classical RK4 on mu' = -lambda mu^2, long double throughout.
inline long double riccati_rk4(long double mu0, long double lambda, long double t, std::size_t steps) {
    const long double h = t / static_cast<long double>(steps);
    long double m = mu0;
    auto f = [lambda](long double v) { return -lambda * v * v; };
    for (std::size_t k = 0; k < steps; ++k) {
        const long double k1 = f(m);
        const long double k2 = f(m + 0.5L * h * k1);
        const long double k3 = f(m + 0.5L * h * k2);
        const long double k4 = f(m + h * k3);
        m += h / 6.0L * (k1 + 2.0L * k2 + 2.0L * k3 + k4);
    }
    return m;
}

/// Quadratic solution at a finite level, summed directly.
inline long double quadratic_value(const std::vector<double>& lambda, const std::vector<double>& mu0, double t,
                                   const std::vector<double>& x) {
    long double v = 0.0L;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        const long double l = lambda[i], m = mu0[i];
        v += std::log1p(static_cast<double>(l * m * t)) / l;
        if (i < x.size()) v += 0.5L * riccati(m, l, t) * x[i] * x[i];
    }
    return v;
}

/// Golden-section search of a 1-D convex function on [a, b].
inline double golden_min(const std::function<double(double)>& f, double a, double b, double* arg = nullptr) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 300 && b - a > 1e-13 * (1.0 + std::fabs(a) + std::fabs(b)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    const double m = 0.5 * (a + b);
    if (arg) *arg = m;
    return f(m);
}

/// Viscous 1-D value -(2/lambda) log of the heat-kernel average of
/// exp(-lambda f / 2), composite Simpson in long double on [x - W, x + W].
inline double cole_hopf(const std::function<double(double)>& f, double lambda, double t, double x,
                        std::size_t panels = 40000) {
    const double W = 40.0 * std::sqrt(t) + 8.0;
    const long double h = 2.0L * W / static_cast<long double>(panels);
    // Shift the exponent by its value at y = x to avoid underflow.
    const long double shift = -0.5L * lambda * f(x);
    auto g = [&](long double y) {
        const long double d = x - y;
        return std::exp(-d * d / (4.0L * t) - 0.5L * lambda * f(static_cast<double>(y)) - shift);
    };
    long double s = g(x - W) + g(x + W);
    for (std::size_t k = 1; k < panels; ++k) s += (k % 2 ? 4.0L : 2.0L) * g(x - W + h * k);
    const long double integral = s * h / 3.0L / std::sqrt(4.0L * 3.14159265358979323846L * t);
    return static_cast<double>(-(2.0L / lambda) * (std::log(integral) + shift));
}

}  // namespace oracle
