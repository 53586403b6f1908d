#include "hjblab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hjb {

bool TruncatedPoint::all_finite() const noexcept {
    return std::all_of(coords.begin(), coords.end(), [](double v) { return std::isfinite(v); });
}

double circle_frequency_eigenvalue(std::size_t sites, std::size_t frequency) {
    const double n = static_cast<double>(sites);
    const double s = std::sin(std::numbers::pi * static_cast<double>(frequency) / n);
    return 1.0 + 4.0 * n * n * s * s;
}

Expected<EigenSpectrum> make_spectrum(const SpectrumDescriptor& descriptor) {
    EigenSpectrum out;
    out.descriptor_ = descriptor;
    if (const auto* p = std::get_if<PowerLawSpec>(&descriptor)) {
        if (!(p->alpha > 1.0) || !std::isfinite(p->alpha)) {
            return unexpected(ErrorCode::InvalidArgument,
                              "power-law exponent must exceed 1 for log(1+l)/l to be summable");
        }
        out.kind_ = SpectrumKind::PowerLaw;
        out.alpha_ = p->alpha;
        return out;
    }
    if (const auto* c = std::get_if<CircleSpec>(&descriptor)) {
        if (c->sites < 2) {
            return unexpected(ErrorCode::InvalidArgument, "circle spectrum needs at least 2 sites");
        }
        out.kind_ = SpectrumKind::Circle;
        out.table_.reserve(c->sites);
        for (std::size_t k = 0; k < c->sites; ++k) {
            out.table_.push_back(circle_frequency_eigenvalue(c->sites, k));
        }
        std::sort(out.table_.begin(), out.table_.end());
        return out;
    }
    const auto& e = std::get<ExplicitSpec>(descriptor);
    if (e.values.empty()) {
        return unexpected(ErrorCode::InvalidArgument, "explicit spectrum is empty");
    }
    for (std::size_t i = 0; i < e.values.size(); ++i) {
        const double v = e.values[i];
        if (!(v > 0.0) || !std::isfinite(v)) {
            return unexpected(ErrorCode::InvalidArgument,
                              "explicit eigenvalue " + std::to_string(i) + " is not a positive finite real");
        }
        if (i > 0 && v < e.values[i - 1]) {
            return unexpected(ErrorCode::InvalidArgument,
                              "explicit eigenvalues must be non-decreasing (index " + std::to_string(i) + ")");
        }
    }
    out.kind_ = SpectrumKind::Explicit;
    out.table_ = e.values;
    return out;
}

std::optional<std::size_t> EigenSpectrum::capacity() const noexcept {
    if (kind_ == SpectrumKind::PowerLaw) return std::nullopt;
    return table_.size();
}

bool EigenSpectrum::supports(std::size_t n_modes) const noexcept {
    const auto cap = capacity();
    return !cap || n_modes <= *cap;
}

double EigenSpectrum::eigenvalue(std::size_t i) const {
    if (kind_ == SpectrumKind::PowerLaw) return std::pow(static_cast<double>(i + 1), alpha_);
    return table_.at(i);
}

std::vector<double> EigenSpectrum::eigenvalues(std::size_t n) const {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = eigenvalue(i);
    return out;
}

std::string EigenSpectrum::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case SpectrumKind::PowerLaw: os << "power_law(alpha=" << alpha_ << ")"; break;
        case SpectrumKind::Circle: os << "circle(sites=" << table_.size() << ")"; break;
        case SpectrumKind::Explicit: os << "explicit(" << table_.size() << " values)"; break;
    }
    return os.str();
}

namespace {

// Integral majorant of sum_{m > n} log(1 + m^a) / m^a for n >= 1, using
// log(1 + x^a) <= log 2 + a log x on x >= 1.
double power_law_summability_tail(double alpha, double n) {
    const double am1 = alpha - 1.0;
    const double pw = std::pow(n, -am1);
    return std::log(2.0) * pw / am1 + alpha * pw * (std::log(n) / am1 + 1.0 / (am1 * am1));
}

}  // namespace

Expected<SummabilityReport> summability_report(const EigenSpectrum& spectrum, std::size_t n_terms) {
    if (n_terms == 0) return unexpected(ErrorCode::InvalidArgument, "n_terms must be at least 1");
    SummabilityReport rep;
    const auto cap = spectrum.capacity();
    rep.terms_used = cap ? std::min(n_terms, *cap) : n_terms;
    for (std::size_t i = 0; i < rep.terms_used; ++i) {
        const double l = spectrum.eigenvalue(i);
        rep.partial_sum += std::log1p(l) / l;
    }
    if (cap) {
        rep.tail_kind = TailKind::ExactRemainder;
        for (std::size_t i = rep.terms_used; i < *cap; ++i) {
            const double l = spectrum.eigenvalue(i);
            rep.tail_bound += std::log1p(l) / l;
        }
    } else {
        rep.tail_kind = TailKind::IntegralBound;
        rep.tail_bound = power_law_summability_tail(spectrum.alpha(), static_cast<double>(rep.terms_used));
    }
    rep.converges = std::isfinite(rep.partial_sum) && std::isfinite(rep.tail_bound);
    return rep;
}

Expected<TruncatedPoint> apply_operator(const EigenSpectrum& spectrum, OperatorKind which,
                                        const TruncatedPoint& point) {
    if (!spectrum.supports(point.size())) {
        return unexpected(ErrorCode::InvalidArgument, "point level exceeds the spectrum capacity");
    }
    TruncatedPoint out = point;
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double l = spectrum.eigenvalue(i);
        switch (which) {
            case OperatorKind::A: out[i] = l * point[i]; break;
            case OperatorKind::AInverse: out[i] = point[i] / l; break;
            case OperatorKind::B: out[i] = point[i] / std::sqrt(l); break;
            case OperatorKind::BSquared: out[i] = point[i] / l; break;
        }
    }
    return out;
}

double inverse_metric(const EigenSpectrum& spectrum, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * x[i] / spectrum.eigenvalue(i);
    return s;
}

double forward_metric(const EigenSpectrum& spectrum, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += spectrum.eigenvalue(i) * x[i] * x[i];
    return s;
}

}  // namespace hjb
