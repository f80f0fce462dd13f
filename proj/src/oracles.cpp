#include "lawq/oracles.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lawq/error.hpp"

namespace lawq::oracle {

namespace {

void check_inputs(std::span<const double> w, std::span<const double> d) {
    if (w.size() != d.size()) fail(ErrorCode::LengthMismatch, "oracle inputs differ in length");
    if (w.empty()) fail(ErrorCode::InvalidArgument, "oracle needs at least one weight");
}

double weighted_error(std::span<const double> w, std::span<const double> d, std::span<const double> w_hat) {
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) total += d[i] * (w_hat[i] - w[i]) * (w_hat[i] - w[i]);
    return 0.5 * total;
}

// One side of the two-scale problem: each magnitude is either kept
// (reconstructed as the side's scale) or dropped.
struct SideOptimum {
    double objective = 0.0;
    double scale = 0.0;
    std::vector<int> keep;
};

SideOptimum enumerate_side(const std::vector<double>& mag, const std::vector<double>& dd) {
    const std::size_t n = mag.size();
    SideOptimum best;
    best.keep.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) best.objective += 0.5 * dd[i] * mag[i] * mag[i];
    const std::uint64_t patterns = std::uint64_t{1} << n;
    for (std::uint64_t mask = 1; mask < patterns; ++mask) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1U) {
                num += dd[i] * mag[i];
                den += dd[i];
            }
        }
        const double scale = num / den;
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double hat = (mask >> i & 1U) ? scale : 0.0;
            obj += 0.5 * dd[i] * (hat - mag[i]) * (hat - mag[i]);
        }
        if (obj < best.objective) {
            best.objective = obj;
            best.scale = scale;
            for (std::size_t i = 0; i < n; ++i) best.keep[i] = static_cast<int>(mask >> i & 1U);
        }
    }
    return best;
}

}  // namespace

TernaryOptimum oracle_ternary(std::span<const double> w, std::span<const double> d) {
    check_inputs(w, d);
    const std::size_t n = w.size();
    if (n > kMaxEnumeration) {
        fail(ErrorCode::TooLarge, "ternary enumeration limited to " + std::to_string(kMaxEnumeration) + " weights");
    }
    TernaryOptimum best;
    best.codes.assign(n, 0);
    best.objective = std::numeric_limits<double>::infinity();

    std::vector<int> b(n, -1);
    std::vector<double> w_hat(n);
    for (;;) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num += std::fabs(b[i] * d[i] * w[i]);
            den += std::fabs(b[i] * d[i]);
        }
        // The all-zero pattern leaves alpha free; its objective does not depend on it.
        const double alpha = den > 0.0 ? num / den : 0.0;
        for (std::size_t i = 0; i < n; ++i) w_hat[i] = alpha * b[i];
        const double obj = weighted_error(w, d, w_hat);
        if (obj < best.objective) {
            best.objective = obj;
            best.alpha = alpha;
            best.codes = b;
        }
        std::size_t pos = 0;
        while (pos < n && b[pos] == 1) b[pos++] = -1;
        if (pos == n) break;
        ++b[pos];
    }
    return best;
}

TwnOptimum oracle_twn_threshold(std::span<const double> w) {
    if (w.empty()) fail(ErrorCode::InvalidArgument, "oracle needs at least one weight");
    std::vector<double> candidates{0.0};
    for (double x : w) candidates.push_back(std::fabs(x));

    TwnOptimum best;
    double best_score = -1.0;
    for (double delta : candidates) {
        double sum = 0.0;
        std::size_t count = 0;
        for (double x : w) {
            if (std::fabs(x) > delta) {
                sum += std::fabs(x);
                ++count;
            }
        }
        if (count == 0) continue;
        const double score = sum * sum / static_cast<double>(count);
        if (score > best_score) {
            best_score = score;
            best.delta = delta;
            best.alpha = sum / static_cast<double>(count);
        }
    }
    if (best_score <= 0.0) fail(ErrorCode::DegenerateInput, "all weights are zero");
    best.codes.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        best.codes[i] = w[i] > best.delta ? 1 : (w[i] < -best.delta ? -1 : 0);
    }
    return best;
}

TwoScaleOptimum oracle_two_scale(std::span<const double> w, std::span<const double> d) {
    check_inputs(w, d);
    std::vector<double> pos_mag, pos_d, neg_mag, neg_d;
    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] > 0.0) {
            pos_mag.push_back(w[i]);
            pos_d.push_back(d[i]);
            pos_idx.push_back(i);
        } else if (w[i] < 0.0) {
            neg_mag.push_back(-w[i]);
            neg_d.push_back(d[i]);
            neg_idx.push_back(i);
        }
    }
    if (pos_mag.size() > kMaxEnumeration || neg_mag.size() > kMaxEnumeration) {
        fail(ErrorCode::TooLarge, "two-scale enumeration limited to " + std::to_string(kMaxEnumeration) +
                                      " weights per sign");
    }
    const SideOptimum pos = enumerate_side(pos_mag, pos_d);
    const SideOptimum neg = enumerate_side(neg_mag, neg_d);

    TwoScaleOptimum out;
    out.alpha = pos.scale;
    out.beta = neg.scale;
    out.p.assign(w.size(), 0);
    out.q.assign(w.size(), 0);
    for (std::size_t j = 0; j < pos_idx.size(); ++j) out.p[pos_idx[j]] = pos.keep[j];
    for (std::size_t j = 0; j < neg_idx.size(); ++j) out.q[neg_idx[j]] = -neg.keep[j];
    std::vector<double> w_hat(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) w_hat[i] = out.alpha * out.p[i] + out.beta * out.q[i];
    out.objective = weighted_error(w, d, w_hat);
    return out;
}

std::vector<double> reference_levels(QuantKind kind, int bits) {
    if (kind == QuantKind::Ternary || bits == 2) return {-1.0, 0.0, 1.0};
    const int k = static_cast<int>(std::pow(2.0, bits - 1)) - 1;
    std::vector<double> positive;
    for (int j = 1; j <= k; ++j) {
        positive.push_back(kind == QuantKind::Linear ? static_cast<double>(j) / k : std::pow(0.5, k - j));
    }
    std::vector<double> out;
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) out.push_back(-*it);
    out.push_back(0.0);
    out.insert(out.end(), positive.begin(), positive.end());
    return out;
}

GridOptimum oracle_alpha_grid(std::span<const double> w, std::span<const double> d, const QuantSet& qset,
                              std::size_t resolution) {
    check_inputs(w, d);
    if (resolution < 1000) fail(ErrorCode::InvalidArgument, "grid resolution must be at least 1000");
    const std::vector<double> levels = reference_levels(qset.kind(), qset.bits());
    double max_abs = 0.0;
    for (double x : w) max_abs = std::max(max_abs, std::fabs(x));

    const std::size_t n = w.size();
    GridOptimum best;
    best.levels.assign(n, 0.0);
    best.objective = weighted_error(w, d, std::vector<double>(n, 0.0));
    if (max_abs == 0.0) return best;

    std::vector<double> chosen(n);
    std::vector<double> w_hat(n);
    const double upper = 2.0 * max_abs;
    for (std::size_t step = 1; step <= resolution; ++step) {
        const double alpha = upper * static_cast<double>(step) / static_cast<double>(resolution);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = w[i] / alpha;
            double pick = levels.front();
            double gap = std::fabs(pick - x);
            for (double q : levels) {
                const double g = std::fabs(q - x);
                if (g < gap || (g == gap && std::fabs(q) > std::fabs(pick))) {
                    gap = g;
                    pick = q;
                }
            }
            chosen[i] = pick;
            w_hat[i] = alpha * pick;
        }
        const double obj = weighted_error(w, d, w_hat);
        if (obj < best.objective) {
            best.objective = obj;
            best.alpha = alpha;
            best.levels = chosen;
        }
    }
    return best;
}

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& loss,
                                     std::span<const double> point, double h) {
    if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "finite-difference step must be positive");
    std::vector<double> x(point.begin(), point.end());
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double up = loss(x);
        x[i] = saved - h;
        const double down = loss(x);
        x[i] = saved;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

void OracleReport::record_gap(double abs_gap, double rel_gap) {
    max_abs_gap = std::max(max_abs_gap, abs_gap);
    max_rel_gap = std::max(max_rel_gap, rel_gap);
}

}  // namespace lawq::oracle
