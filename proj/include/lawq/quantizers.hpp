#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lawq/qset.hpp"

namespace lawq {

// A layer quantized to alpha * Q (one scale) or to {alpha, 0, -beta} (two
// scales, where code +1 selects alpha and code -1 selects -beta).
struct QuantizedLayer {
    double alpha = 0.0;
    std::optional<double> beta;
    std::vector<Code> codes;
    QuantSet qset = QuantSet::ternary();

    bool two_scale() const noexcept { return beta.has_value(); }
    double value_at(std::size_t i) const noexcept;
    std::vector<double> reconstruct() const;
};

struct SolveInfo {
    int iterations = 0;
    bool converged = true;
    // All-zero code vector: the scale is unidentifiable and w_hat = 0.
    bool degenerate = false;
    // Per-side flags for the two-scale solvers.
    bool alpha_degenerate = false;
    bool beta_degenerate = false;
    // Objective 0.5 * sum d_i (w_hat_i - w_i)^2 after every sweep.
    std::vector<double> objective_trace;
};

struct QuantResult {
    QuantizedLayer layer;
    SolveInfo info;
};

// Intermediate quantities of the sort-based exact ternary solver.  Indices
// are zero-based: order[r] is the weight with the r-th largest |w|.
struct TernaryExactTrace {
    std::vector<std::size_t> order;
    std::vector<double> ratios;             // c_r
    std::vector<std::size_t> candidates;    // ranks satisfying the bracketing rule
    std::size_t chosen = 0;                 // rank whose 2*c_r is the returned alpha
    double objective = 0.0;
};

struct ExactResult {
    QuantizedLayer layer;
    TernaryExactTrace trace;
};

struct AlternationOptions {
    int max_iterations = 100;
    double tolerance = 1e-6;
};

// d_i <- max(d_i, floor); applied when curvature is loaded from outside.
inline constexpr double kCurvatureFloor = 1e-8;
std::vector<double> clamp_curvature(std::span<const double> d);

double quantization_objective(std::span<const double> w, std::span<const double> d,
                              const QuantizedLayer& layer);

// I_delta(w): +1 above delta, -1 below -delta, 0 otherwise (strict).
std::vector<Code> threshold_codes(std::span<const double> w, double delta);

QuantizedLayer binarize_sign(std::span<const double> w);
QuantizedLayer binarize_bwn(std::span<const double> w);
QuantizedLayer binarize_lab(std::span<const double> w, std::span<const double> d);

QuantizedLayer ternarize_twn(std::span<const double> w);

ExactResult ternarize_exact(std::span<const double> w, std::span<const double> d);

// An empty or all-zero codes_init is replaced by sign(w).
QuantResult ternarize_approx(std::span<const double> w, std::span<const double> d,
                             std::span<const Code> codes_init, const AlternationOptions& opts = {});

QuantResult ternarize_two_scale_exact(std::span<const double> w, std::span<const double> d);
QuantResult ternarize_two_scale_approx(std::span<const double> w, std::span<const double> d,
                                       std::span<const Code> codes_init,
                                       const AlternationOptions& opts = {});

// codes_init are level codes of qset; an empty or all-zero vector is
// replaced by the projection of w / max|w| onto Q, or by sign(w) when Q is
// ternary (matching ternarize_approx).
QuantResult quantize_mbit(std::span<const double> w, std::span<const double> d, const QuantSet& qset,
                          std::span<const Code> codes_init, const AlternationOptions& opts = {});

std::vector<double> quantize_dorefa(std::span<const double> w, int bits);

}  // namespace lawq
