#include "lawq/qset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lawq/error.hpp"

namespace lawq {

std::string_view to_string(QuantKind kind) noexcept {
    switch (kind) {
        case QuantKind::Ternary: return "ternary";
        case QuantKind::Linear: return "linear";
        case QuantKind::Log: return "log";
    }
    return "?";
}

std::string_view to_string(Scheme scheme) noexcept {
    return scheme == Scheme::Linear ? "linear" : "log";
}

Scheme parse_scheme(std::string_view text) {
    if (text == "linear") return Scheme::Linear;
    if (text == "log") return Scheme::Log;
    fail(ErrorCode::BadValue, "unknown quantization scheme '" + std::string(text) + "'");
}

QuantSet::QuantSet(QuantKind kind, int bits) : kind_(kind), bits_(bits), k_((1 << (bits - 1)) - 1) {
    levels_.resize(static_cast<std::size_t>(k_) + 1);
    midpoints_.resize(static_cast<std::size_t>(k_));
    levels_[0] = 0.0;
    for (int j = 1; j <= k_; ++j) {
        levels_[j] = kind == QuantKind::Log ? std::ldexp(1.0, j - k_)
                                             : static_cast<double>(j) / static_cast<double>(k_);
    }
    // Midpoints are written in closed form so each carries a single rounding
    // (none at all for the power-of-two levels).
    for (int j = 0; j < k_; ++j) {
        if (kind == QuantKind::Log) {
            midpoints_[j] = j == 0 ? std::ldexp(1.0, -k_) : 3.0 * std::ldexp(1.0, j - k_ - 1);
        } else {
            midpoints_[j] = static_cast<double>(2 * j + 1) / static_cast<double>(2 * k_);
        }
    }
}

QuantSet QuantSet::ternary() { return QuantSet(QuantKind::Ternary, 2); }

QuantSet QuantSet::build(int bits, Scheme scheme) {
    if (bits < 2 || bits > kMaxBits) {
        fail(ErrorCode::InvalidBits, "bits must lie in [2, " + std::to_string(kMaxBits) + "], got " +
                                         std::to_string(bits));
    }
    // Both schemes collapse to {-1, 0, 1} at two bits.
    if (bits == 2) return ternary();
    return QuantSet(scheme == Scheme::Linear ? QuantKind::Linear : QuantKind::Log, bits);
}

std::vector<double> QuantSet::values() const {
    std::vector<double> out;
    out.reserve(size());
    for (int c = -k_; c <= k_; ++c) out.push_back(value(static_cast<Code>(c)));
    return out;
}

Code QuantSet::project(double x) const noexcept {
    const double mag = std::fabs(x);
    const auto level = std::upper_bound(midpoints_.begin(), midpoints_.end(), mag) - midpoints_.begin();
    return static_cast<Code>(x < 0 ? -level : level);
}

Code QuantSet::project_scaled(double w, double scale) const noexcept {
    const double mag = std::fabs(w);
    const auto it = std::partition_point(midpoints_.begin(), midpoints_.end(),
                                         [&](double mid) { return scale * mid <= mag; });
    const auto level = it - midpoints_.begin();
    return static_cast<Code>(w < 0 ? -level : level);
}

Code project_qset(double x, const QuantSet& qset) { return qset.project(x); }

}  // namespace lawq
