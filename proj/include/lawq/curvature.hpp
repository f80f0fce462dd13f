#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lawq {

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 0.01;

    void validate() const;
};

struct OptimizerState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;

    static OptimizerState zeros(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0}; }
};

struct AdamStepResult {
    OptimizerState state;
    std::vector<double> m_hat;
    std::vector<double> v_hat;
};

// One moment update; throws NonFiniteGradient on NaN/Inf gradients.
AdamStepResult adam_step(const OptimizerState& state, std::span<const double> grad, const AdamHyper& hyper);

// d = (epsilon + sqrt(v_hat)) / eta, bounded below by epsilon / eta.
std::vector<double> curvature_from_moments(std::span<const double> v_hat, double eta, double epsilon);

// w - m_hat / d.
std::vector<double> precond_step(std::span<const double> w, std::span<const double> m_hat,
                                 std::span<const double> d);

}  // namespace lawq
