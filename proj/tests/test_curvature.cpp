#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "lawq/curvature.hpp"
#include "lawq/error.hpp"

namespace lawq {
namespace {

using Vec = std::vector<double>;

TEST(Adam, FirstStepBiasCorrectionCancels) {
    const AdamHyper hyper;
    const AdamStepResult r = adam_step(OptimizerState::zeros(1), Vec{1.0}, hyper);
    EXPECT_NEAR(r.state.m[0], 0.1, 1e-16);
    EXPECT_NEAR(r.state.v[0], 0.001, 1e-18);
    EXPECT_EQ(r.state.t, 1u);
    EXPECT_NEAR(r.m_hat[0], 1.0, 1e-15);
    EXPECT_NEAR(r.v_hat[0], 1.0, 1e-12);
}

TEST(Adam, TwoStepRecursion) {
    const AdamHyper hyper;
    const AdamStepResult a = adam_step(OptimizerState::zeros(1), Vec{1.0}, hyper);
    const AdamStepResult b = adam_step(a.state, Vec{0.0}, hyper);
    EXPECT_NEAR(b.state.m[0], 0.09, 1e-16);
    EXPECT_NEAR(b.m_hat[0], 0.09 / 0.19, 1e-15);
    EXPECT_NEAR(b.m_hat[0], 0.47368, 1e-5);
}

TEST(Adam, ZeroGradientLeavesWeights) {
    const AdamHyper hyper;
    OptimizerState s = OptimizerState::zeros(3);
    const Vec w{0.1, -0.2, 0.3};
    for (int i = 0; i < 5; ++i) {
        const AdamStepResult r = adam_step(s, Vec{0, 0, 0}, hyper);
        const Vec d = curvature_from_moments(r.v_hat, hyper.learning_rate, hyper.epsilon);
        EXPECT_EQ(precond_step(w, r.m_hat, d), w);
        s = r.state;
    }
}

TEST(Adam, DecayingMoments) {
    const AdamHyper hyper;
    AdamStepResult r = adam_step(OptimizerState::zeros(1), Vec{1.0}, hyper);
    double prev_m = r.m_hat[0];
    double prev_v = r.v_hat[0];
    for (int i = 0; i < 20; ++i) {
        r = adam_step(r.state, Vec{0.0}, hyper);
        EXPECT_LT(r.m_hat[0], prev_m);
        EXPECT_LT(r.v_hat[0], prev_v);
        prev_m = r.m_hat[0];
        prev_v = r.v_hat[0];
    }
}

TEST(Adam, RejectsNonFinite) {
    const AdamHyper hyper;
    for (double bad : {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity()}) {
        try {
            adam_step(OptimizerState::zeros(2), Vec{0.0, bad}, hyper);
            ADD_FAILURE() << "expected NonFiniteGradient";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::NonFiniteGradient);
        }
    }
}

TEST(Adam, Deterministic) {
    const AdamHyper hyper;
    OptimizerState s{{0.1, -0.3}, {0.02, 0.5}, 7};
    const AdamStepResult a = adam_step(s, Vec{0.25, -1.5}, hyper);
    const AdamStepResult b = adam_step(s, Vec{0.25, -1.5}, hyper);
    EXPECT_EQ(a.state.m, b.state.m);
    EXPECT_EQ(a.state.v, b.state.v);
    EXPECT_EQ(a.m_hat, b.m_hat);
    EXPECT_EQ(a.v_hat, b.v_hat);
}

TEST(CurvatureFromMoments, Formula) {
    const Vec d = curvature_from_moments(Vec{0.04}, 0.01, 1e-8);
    EXPECT_NEAR(d[0], 20.000001, 1e-9);
    const Vec floor = curvature_from_moments(Vec{0.0, 0.0}, 0.01, 1e-8);
    for (double x : floor) {
        EXPECT_NEAR(x, 1e-6, 1e-21);
        EXPECT_GT(x, 0.0);
    }
    const Vec v{0.04, 1.0, 0.0, 3.0};
    const Vec d1 = curvature_from_moments(v, 0.01, 1e-8);
    const Vec d2 = curvature_from_moments(v, 0.02, 1e-8);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(d2[i], d1[i] / 2, 1e-12 * d1[i]);
}

TEST(PrecondStep, Arithmetic) {
    EXPECT_EQ(precond_step(Vec{1.0}, Vec{2.0}, Vec{4.0}), Vec{0.5});
    EXPECT_EQ(precond_step(Vec{1.0, -2.0}, Vec{0.0, 0.0}, Vec{3.0, 5.0}), (Vec{1.0, -2.0}));
}

TEST(PrecondStep, MatchesAdamAtFirstStep) {
    AdamHyper hyper;
    hyper.learning_rate = 0.003;
    const Vec g{0.7, -2.0, 1e-3};
    const Vec w{0.1, 0.2, -0.3};
    const AdamStepResult r = adam_step(OptimizerState::zeros(3), g, hyper);
    const Vec d = curvature_from_moments(r.v_hat, hyper.learning_rate, hyper.epsilon);
    const Vec next = precond_step(w, r.m_hat, d);
    for (std::size_t i = 0; i < w.size(); ++i) {
        // Standard Adam: w - eta * m_hat / (sqrt(v_hat) + eps).
        const double adam = w[i] - hyper.learning_rate * r.m_hat[i] / (std::sqrt(r.v_hat[i]) + hyper.epsilon);
        EXPECT_NEAR(next[i], adam, 1e-15);
    }
}

TEST(AdamHyperTest, Validation) {
    AdamHyper bad;
    bad.beta1 = 1.0;
    EXPECT_THROW(bad.validate(), Error);
    bad = {};
    bad.learning_rate = 0.0;
    EXPECT_THROW(bad.validate(), Error);
    EXPECT_NO_THROW(AdamHyper{}.validate());
}

}  // namespace
}  // namespace lawq
