#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lawq/quantizers.hpp"

namespace lawq {

enum class Method {
    FullPrecision,
    Sign,
    Bwn,
    Lab,
    Twn,
    LatExact,
    LatApprox,
    Lat2Exact,
    Lat2Approx,
    Laq,
    Dorefa,
};

struct MethodSpec {
    Method method = Method::FullPrecision;
    int bits = 2;
    Scheme scheme = Scheme::Linear;

    bool loss_aware() const noexcept;
    // Binary and ternary methods keep shadow weights in [-1, 1]; m-bit ones do not.
    bool clips_weights() const noexcept;
    bool uses_codes() const noexcept;
    std::string label() const;
};

std::string_view to_string(Method method) noexcept;

// Accepts the lowercase ids (lat-exact, laq, ...) and the table labels
// LATe, LATa, LAT2e, LAT2a, LAQ<m>(linear|log).  Labels that carry a bit
// width or scheme fill them in; plain ids keep the defaults above.
MethodSpec parse_method(std::string_view text);

// Result of quantizing one layer under a method.  `layer` is empty for
// methods without an integer-code representation (full precision, DoReFa);
// `w_hat` always holds the reconstructed weights.
struct LayerQuantization {
    std::optional<QuantizedLayer> layer;
    std::vector<double> w_hat;
    SolveInfo info;
};

// d may be empty for methods that do not use curvature.  prev_codes seeds
// the alternating solvers and may be empty.
LayerQuantization quantize_with(const MethodSpec& spec, std::span<const double> w, std::span<const double> d,
                                std::span<const Code> prev_codes, const AlternationOptions& opts = {});

}  // namespace lawq
