#include "lawq/curvature.hpp"

#include <cmath>
#include <string>

#include "lawq/error.hpp"

namespace lawq {

void AdamHyper::validate() const {
    if (!(beta1 > 0.0 && beta1 < 1.0)) fail(ErrorCode::BadValue, "adam beta1 must lie in (0, 1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) fail(ErrorCode::BadValue, "adam beta2 must lie in (0, 1)");
    if (!(epsilon > 0.0)) fail(ErrorCode::BadValue, "adam epsilon must be positive");
    if (!(learning_rate > 0.0)) fail(ErrorCode::BadValue, "learning rate must be positive");
}

AdamStepResult adam_step(const OptimizerState& state, std::span<const double> grad, const AdamHyper& hyper) {
    const std::size_t n = grad.size();
    if (state.m.size() != n || state.v.size() != n) {
        fail(ErrorCode::LengthMismatch, "optimizer state holds " + std::to_string(state.m.size()) +
                                            " entries, gradient has " + std::to_string(n));
    }
    for (double g : grad) {
        if (!std::isfinite(g)) fail(ErrorCode::NonFiniteGradient, "gradient contains NaN/Inf");
    }
    AdamStepResult out;
    out.state.t = state.t + 1;
    out.state.m.resize(n);
    out.state.v.resize(n);
    out.m_hat.resize(n);
    out.v_hat.resize(n);
    const double t = static_cast<double>(out.state.t);
    const double c1 = 1.0 - std::pow(hyper.beta1, t);
    const double c2 = 1.0 - std::pow(hyper.beta2, t);
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        out.state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * g;
        out.state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * g * g;
        out.m_hat[i] = out.state.m[i] / c1;
        out.v_hat[i] = out.state.v[i] / c2;
    }
    return out;
}

std::vector<double> curvature_from_moments(std::span<const double> v_hat, double eta, double epsilon) {
    if (!(eta > 0.0)) fail(ErrorCode::InvalidArgument, "learning rate must be positive");
    if (!(epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon must be positive");
    std::vector<double> d(v_hat.size());
    for (std::size_t i = 0; i < v_hat.size(); ++i) {
        if (!(v_hat[i] >= 0.0)) fail(ErrorCode::InvalidArgument, "second moment must be nonnegative");
        d[i] = (epsilon + std::sqrt(v_hat[i])) / eta;
    }
    return d;
}

std::vector<double> precond_step(std::span<const double> w, std::span<const double> m_hat,
                                 std::span<const double> d) {
    if (m_hat.size() != w.size() || d.size() != w.size()) {
        fail(ErrorCode::LengthMismatch, "precond_step inputs differ in length");
    }
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] - m_hat[i] / d[i];
    return out;
}

}  // namespace lawq
