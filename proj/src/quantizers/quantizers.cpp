#include "lawq/quantizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lawq/error.hpp"

namespace lawq {

namespace {

void check_weights(std::span<const double> w) {
    if (w.empty()) fail(ErrorCode::InvalidArgument, "weight vector is empty");
    for (double x : w) {
        if (!std::isfinite(x)) fail(ErrorCode::NonFinite, "weight vector contains NaN/Inf");
    }
}

void check_curvature(std::span<const double> w, std::span<const double> d) {
    check_weights(w);
    if (d.size() != w.size()) {
        fail(ErrorCode::LengthMismatch, "curvature has " + std::to_string(d.size()) + " entries, weights have " +
                                            std::to_string(w.size()));
    }
    for (double x : d) {
        if (!std::isfinite(x) || !(x > 0.0)) {
            fail(ErrorCode::InvalidArgument, "curvature entries must be finite and strictly positive");
        }
    }
}

bool all_zero(std::span<const double> w) {
    return std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; });
}

bool all_zero(std::span<const Code> codes) {
    return std::all_of(codes.begin(), codes.end(), [](Code c) { return c == 0; });
}

void check_codes(std::span<const Code> codes, std::size_t n, int k) {
    if (codes.size() != n) {
        fail(ErrorCode::LengthMismatch, "initial codes have " + std::to_string(codes.size()) + " entries, expected " +
                                            std::to_string(n));
    }
    for (Code c : codes) {
        if (c < -k || c > k) fail(ErrorCode::InvalidArgument, "initial code " + std::to_string(c) + " outside Q");
    }
}

double objective_for(std::span<const double> w, std::span<const double> d, double alpha,
                     std::span<const Code> codes) {
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double r = alpha * codes[i] - w[i];
        total += d[i] * r * r;
    }
    return 0.5 * total;
}

QuantizedLayer make_layer(double alpha, std::vector<Code> codes) {
    QuantizedLayer out;
    out.alpha = alpha;
    out.codes = std::move(codes);
    return out;
}

// Sort-based solver for min 0.5 * sum d_i (alpha b_i - m_i)^2 over alpha > 0
// and b in {0, 1}^n, where m holds nonnegative magnitudes.
struct SortedSolve {
    std::vector<std::size_t> order;
    std::vector<double> ratios;
    std::vector<std::size_t> candidates;
    std::size_t chosen = 0;
    double alpha = 0.0;
};

SortedSolve solve_sorted(std::span<const double> mag, std::span<const double> d) {
    const std::size_t n = mag.size();
    SortedSolve out;
    out.order.resize(n);
    std::iota(out.order.begin(), out.order.end(), std::size_t{0});
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });

    out.ratios.resize(n);
    std::vector<double> cum_d(n);
    double sum_dw = 0.0;
    double sum_d = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t i = out.order[r];
        sum_dw += d[i] * mag[i];
        sum_d += d[i];
        cum_d[r] = sum_d;
        out.ratios[r] = sum_dw / sum_d / 2.0;
    }
    for (std::size_t r = 0; r + 1 < n; ++r) {
        const double lhs = mag[out.order[r]] - out.ratios[r];
        const double rhs = mag[out.order[r + 1]] - out.ratios[r];
        if (lhs * rhs < 0.0) out.candidates.push_back(r);
    }

    // Score every rank rather than only the bracketing candidates: the
    // bracketing set can be empty under ties, and the superset keeps the
    // optimum.  Near-equal scores are settled by the true objective.
    std::vector<double> score(n);
    for (std::size_t r = 0; r < n; ++r) score[r] = out.ratios[r] * out.ratios[r] * cum_d[r];
    const double best = *std::max_element(score.begin(), score.end());
    double best_obj = 0.0;
    bool have = false;
    for (std::size_t r = 0; r < n; ++r) {
        if (score[r] < best * (1.0 - 1e-12)) continue;
        const double alpha = 2.0 * out.ratios[r];
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double hat = mag[i] > alpha / 2.0 ? alpha : 0.0;
            const double res = hat - mag[i];
            obj += d[i] * res * res;
        }
        if (!have || obj < best_obj) {
            have = true;
            best_obj = obj;
            out.chosen = r;
            out.alpha = alpha;
        }
    }
    return out;
}

}  // namespace

double QuantizedLayer::value_at(std::size_t i) const noexcept {
    const Code c = codes[i];
    if (beta) {
        if (c > 0) return alpha;
        if (c < 0) return -*beta;
        return 0.0;
    }
    return alpha * qset.value(c);
}

std::vector<double> QuantizedLayer::reconstruct() const {
    std::vector<double> out(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) out[i] = value_at(i);
    return out;
}

std::vector<double> clamp_curvature(std::span<const double> d) {
    std::vector<double> out(d.begin(), d.end());
    for (double& x : out) {
        if (!std::isfinite(x)) fail(ErrorCode::NonFinite, "curvature contains NaN/Inf");
        x = std::max(x, kCurvatureFloor);
    }
    return out;
}

double quantization_objective(std::span<const double> w, std::span<const double> d,
                              const QuantizedLayer& layer) {
    if (layer.codes.size() != w.size() || d.size() != w.size()) {
        fail(ErrorCode::LengthMismatch, "objective inputs differ in length");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double r = layer.value_at(i) - w[i];
        total += d[i] * r * r;
    }
    return 0.5 * total;
}

std::vector<Code> threshold_codes(std::span<const double> w, double delta) {
    std::vector<Code> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] > delta ? 1 : (w[i] < -delta ? -1 : 0);
    return out;
}

QuantizedLayer binarize_sign(std::span<const double> w) {
    check_weights(w);
    std::vector<Code> codes(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) codes[i] = w[i] < 0.0 ? -1 : 1;
    return make_layer(1.0, std::move(codes));
}

QuantizedLayer binarize_bwn(std::span<const double> w) {
    check_weights(w);
    double l1 = 0.0;
    for (double x : w) l1 += std::fabs(x);
    if (l1 == 0.0) fail(ErrorCode::DegenerateInput, "all weights are zero");
    QuantizedLayer out = binarize_sign(w);
    out.alpha = l1 / static_cast<double>(w.size());
    return out;
}

QuantizedLayer binarize_lab(std::span<const double> w, std::span<const double> d) {
    check_curvature(w, d);
    if (all_zero(w)) fail(ErrorCode::DegenerateInput, "all weights are zero");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        num += d[i] * std::fabs(w[i]);
        den += d[i];
    }
    QuantizedLayer out = binarize_sign(w);
    out.alpha = num / den;
    return out;
}

QuantizedLayer ternarize_twn(std::span<const double> w) {
    check_weights(w);
    double l1 = 0.0;
    for (double x : w) l1 += std::fabs(x);
    const double delta = 0.7 * (l1 / static_cast<double>(w.size()));
    std::vector<Code> codes = threshold_codes(w, delta);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (codes[i] != 0) {
            sum += std::fabs(w[i]);
            ++count;
        }
    }
    if (count == 0) fail(ErrorCode::DegenerateInput, "no weight exceeds the TWN threshold");
    return make_layer(sum / static_cast<double>(count), std::move(codes));
}

ExactResult ternarize_exact(std::span<const double> w, std::span<const double> d) {
    check_curvature(w, d);
    if (all_zero(w)) fail(ErrorCode::DegenerateInput, "all weights are zero");
    std::vector<double> mag(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) mag[i] = std::fabs(w[i]);

    SortedSolve s = solve_sorted(mag, d);
    ExactResult out;
    out.layer = make_layer(s.alpha, threshold_codes(w, s.alpha / 2.0));
    out.trace.order = std::move(s.order);
    out.trace.ratios = std::move(s.ratios);
    out.trace.candidates = std::move(s.candidates);
    out.trace.chosen = s.chosen;
    out.trace.objective = objective_for(w, d, out.layer.alpha, out.layer.codes);
    return out;
}

QuantResult ternarize_approx(std::span<const double> w, std::span<const double> d,
                             std::span<const Code> codes_init, const AlternationOptions& opts) {
    check_curvature(w, d);
    const std::size_t n = w.size();
    std::vector<Code> b;
    if (codes_init.empty() || all_zero(codes_init)) {
        b = threshold_codes(w, 0.0);
    } else {
        check_codes(codes_init, n, 1);
        b.assign(codes_init.begin(), codes_init.end());
    }

    QuantResult out;
    double alpha = 1.0;
    double alpha_old = 0.0;
    out.info.converged = false;
    while (std::fabs(alpha - alpha_old) > opts.tolerance) {
        if (out.info.iterations >= opts.max_iterations) break;
        alpha_old = alpha;
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mag_b = std::fabs(static_cast<double>(b[i]));
            num += mag_b * d[i] * std::fabs(w[i]);
            den += mag_b * d[i];
        }
        if (den == 0.0 || num == 0.0) {
            out.info.degenerate = true;
            break;
        }
        alpha = num / den;
        b = threshold_codes(w, alpha / 2.0);
        ++out.info.iterations;
        out.info.objective_trace.push_back(objective_for(w, d, alpha, b));
        if (all_zero(b)) {
            out.info.degenerate = true;
            break;
        }
    }
    if (out.info.degenerate) {
        out.info.converged = true;
        out.layer = make_layer(0.0, std::vector<Code>(n, 0));
        return out;
    }
    out.info.converged = std::fabs(alpha - alpha_old) <= opts.tolerance;
    out.layer = make_layer(alpha, std::move(b));
    return out;
}

QuantResult ternarize_two_scale_exact(std::span<const double> w, std::span<const double> d) {
    check_curvature(w, d);
    if (all_zero(w)) fail(ErrorCode::DegenerateInput, "all weights are zero");

    // The objective splits into independent positive and negative parts.
    auto side_scale = [&](bool positive) -> double {
        std::vector<double> mag;
        std::vector<double> dd;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (positive ? w[i] > 0.0 : w[i] < 0.0) {
                mag.push_back(std::fabs(w[i]));
                dd.push_back(d[i]);
            }
        }
        if (mag.empty()) return 0.0;
        return solve_sorted(mag, dd).alpha;
    };
    const double alpha = side_scale(true);
    const double beta = side_scale(false);

    QuantResult out;
    out.layer.alpha = alpha;
    out.layer.beta = beta;
    out.layer.codes.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        Code c = 0;
        if (alpha > 0.0 && w[i] > alpha / 2.0) c = 1;
        if (beta > 0.0 && w[i] < -beta / 2.0) c = -1;
        out.layer.codes[i] = c;
    }
    out.info.iterations = 1;
    out.info.alpha_degenerate = alpha == 0.0;
    out.info.beta_degenerate = beta == 0.0;
    out.info.objective_trace.push_back(quantization_objective(w, d, out.layer));
    return out;
}

QuantResult ternarize_two_scale_approx(std::span<const double> w, std::span<const double> d,
                                       std::span<const Code> codes_init, const AlternationOptions& opts) {
    check_curvature(w, d);
    const std::size_t n = w.size();
    std::vector<Code> init;
    if (!codes_init.empty()) {
        check_codes(codes_init, n, 1);
        init.assign(codes_init.begin(), codes_init.end());
    } else {
        init.assign(n, 0);
    }
    std::vector<Code> p(n);
    std::vector<Code> q(n);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = init[i] > 0 ? 1 : 0;
        q[i] = init[i] < 0 ? -1 : 0;
    }
    // A side with no initial codes restarts from the signs of its weights.
    if (all_zero(p)) {
        for (std::size_t i = 0; i < n; ++i) p[i] = w[i] > 0.0 ? 1 : 0;
    }
    if (all_zero(q)) {
        for (std::size_t i = 0; i < n; ++i) q[i] = w[i] < 0.0 ? -1 : 0;
    }

    struct Side {
        std::vector<Code>& codes;
        int sign;
        double scale = 1.0;
        double old = 0.0;
        bool dead = false;
    };
    Side pos{p, 1};
    Side neg{q, -1};

    auto update = [&](Side& s) {
        if (s.dead) return;
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mag_b = std::fabs(static_cast<double>(s.codes[i]));
            num += mag_b * d[i] * std::fabs(w[i]);
            den += mag_b * d[i];
        }
        if (den == 0.0 || num == 0.0) {
            s.dead = true;
        } else {
            s.scale = num / den;
            for (std::size_t i = 0; i < n; ++i) {
                s.codes[i] = s.sign > 0 ? (w[i] > s.scale / 2.0 ? 1 : 0) : (w[i] < -s.scale / 2.0 ? -1 : 0);
            }
            if (all_zero(s.codes)) s.dead = true;
        }
        if (s.dead) {
            s.scale = 0.0;
            s.old = 0.0;
            std::fill(s.codes.begin(), s.codes.end(), Code{0});
        }
    };
    auto moving = [&](const Side& s) { return !s.dead && std::fabs(s.scale - s.old) > opts.tolerance; };

    QuantResult out;
    out.layer.codes.resize(n);
    auto assemble = [&] {
        out.layer.alpha = pos.scale;
        out.layer.beta = neg.scale;
        for (std::size_t i = 0; i < n; ++i) out.layer.codes[i] = static_cast<Code>(p[i] + q[i]);
    };
    while (moving(pos) || moving(neg)) {
        if (out.info.iterations >= opts.max_iterations) break;
        pos.old = pos.scale;
        neg.old = neg.scale;
        update(pos);
        update(neg);
        ++out.info.iterations;
        assemble();
        out.info.objective_trace.push_back(quantization_objective(w, d, out.layer));
    }
    assemble();
    out.info.alpha_degenerate = pos.dead;
    out.info.beta_degenerate = neg.dead;
    out.info.degenerate = pos.dead && neg.dead;
    out.info.converged = !moving(pos) && !moving(neg);
    return out;
}

QuantResult quantize_mbit(std::span<const double> w, std::span<const double> d, const QuantSet& qset,
                          std::span<const Code> codes_init, const AlternationOptions& opts) {
    check_curvature(w, d);
    const std::size_t n = w.size();
    const int k = qset.k();
    std::vector<Code> b;
    if ((codes_init.empty() || all_zero(codes_init)) && qset.kind() == QuantKind::Ternary) {
        // Same start as ternarize_approx, so m = 2 reproduces it exactly.
        b = threshold_codes(w, 0.0);
    } else if (codes_init.empty() || all_zero(codes_init)) {
        // Scale so the largest |w_i| lands on the extreme level.
        double max_abs = 0.0;
        for (double x : w) max_abs = std::max(max_abs, std::fabs(x));
        b.assign(n, 0);
        if (max_abs > 0.0) {
            for (std::size_t i = 0; i < n; ++i) b[i] = qset.project_scaled(w[i], max_abs);
        }
    } else {
        check_codes(codes_init, n, k);
        b.assign(codes_init.begin(), codes_init.end());
    }

    QuantResult out;
    out.layer.qset = qset;
    double alpha = 1.0;
    double alpha_old = 0.0;
    auto objective = [&] {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = alpha * qset.value(b[i]) - w[i];
            total += d[i] * r * r;
        }
        return 0.5 * total;
    };
    while (std::fabs(alpha - alpha_old) > opts.tolerance) {
        if (out.info.iterations >= opts.max_iterations) break;
        alpha_old = alpha;
        // Exact minimizer over alpha for fixed b: sum |b| d |w| / sum b^2 d.
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mag_b = qset.magnitude(b[i]);
            num += mag_b * d[i] * std::fabs(w[i]);
            den += mag_b * mag_b * d[i];
        }
        if (den == 0.0 || num == 0.0) {
            out.info.degenerate = true;
            break;
        }
        alpha = num / den;
        for (std::size_t i = 0; i < n; ++i) b[i] = qset.project_scaled(w[i], alpha);
        ++out.info.iterations;
        out.info.objective_trace.push_back(objective());
        if (all_zero(b)) {
            out.info.degenerate = true;
            break;
        }
    }
    if (out.info.degenerate) {
        out.layer.alpha = 0.0;
        out.layer.codes.assign(n, 0);
        return out;
    }
    out.info.converged = std::fabs(alpha - alpha_old) <= opts.tolerance;
    out.layer.alpha = alpha;
    out.layer.codes = std::move(b);
    return out;
}

std::vector<double> quantize_dorefa(std::span<const double> w, int bits) {
    check_weights(w);
    if (bits < 2) fail(ErrorCode::InvalidBits, "DoReFa needs at least 2 bits");
    if (bits > 52) fail(ErrorCode::InvalidBits, "DoReFa bit width too large");
    double max_tanh = 0.0;
    for (double x : w) max_tanh = std::max(max_tanh, std::fabs(std::tanh(x)));
    if (max_tanh == 0.0) fail(ErrorCode::DegenerateInput, "all weights are zero");
    const double levels = std::ldexp(1.0, bits) - 1.0;
    const double denom = 2.0 * max_tanh;
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double x = std::tanh(w[i]) / denom + 0.5;
        const double q = std::round(levels * x) / levels;
        out[i] = 2.0 * q - 1.0;
    }
    return out;
}

}  // namespace lawq
