#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace lawq {

enum class QuantKind : std::uint8_t { Ternary = 0, Linear = 1, Log = 2 };
enum class Scheme : std::uint8_t { Linear = 0, Log = 1 };

std::string_view to_string(QuantKind kind) noexcept;
std::string_view to_string(Scheme scheme) noexcept;
Scheme parse_scheme(std::string_view text);

using Code = std::int8_t;

// The symmetric set Q of admissible quantized values.  Codes are signed
// level indices: code c maps to sign(c) * level(|c|), level(0) = 0 and
// level(k) = 1, so the code range is [-k, k] with k = 2^(m-1) - 1.
class QuantSet {
public:
    static constexpr int kMaxBits = 8;  // |Q| <= 255 keeps codes in int8

    static QuantSet ternary();
    static QuantSet build(int bits, Scheme scheme);

    QuantKind kind() const noexcept { return kind_; }
    int bits() const noexcept { return bits_; }
    int k() const noexcept { return k_; }
    std::size_t size() const noexcept { return 2 * static_cast<std::size_t>(k_) + 1; }

    // Ascending values, -1 ... 0 ... 1.
    std::vector<double> values() const;

    double value(Code code) const noexcept {
        return code >= 0 ? levels_[static_cast<std::size_t>(code)]
                         : -levels_[static_cast<std::size_t>(-code)];
    }
    double magnitude(Code code) const noexcept {
        return levels_[static_cast<std::size_t>(code >= 0 ? code : -code)];
    }
    bool admits(int code) const noexcept { return code >= -k_ && code <= k_; }

    // Nearest element of Q to x; exact midpoints go away from zero.
    Code project(double x) const noexcept;

    // Code of the value nearest to w / scale, decided by comparing |w| with
    // scale * midpoint so that no division is performed.  For the ternary
    // set this is the thresholding rule |w| > scale/2 except at an exact tie.
    Code project_scaled(double w, double scale) const noexcept;

    bool operator==(const QuantSet& other) const noexcept {
        return kind_ == other.kind_ && bits_ == other.bits_;
    }

private:
    QuantSet(QuantKind kind, int bits);

    QuantKind kind_;
    int bits_;
    int k_;
    std::vector<double> levels_;     // levels_[j], j = 0..k
    std::vector<double> midpoints_;  // midpoints_[j] between levels j and j+1
};

Code project_qset(double x, const QuantSet& qset);

}  // namespace lawq
