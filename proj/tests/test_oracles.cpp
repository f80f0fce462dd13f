#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lawq/error.hpp"
#include "lawq/oracles.hpp"
#include "lawq/rng.hpp"

namespace lawq::oracle {
namespace {

using Vec = std::vector<double>;

TEST(OracleTernary, WorkedExample) {
    const TernaryOptimum o = oracle_ternary(Vec{0.9, 0.4, -0.1}, Vec{1, 1, 1});
    // 0.5 * ((0.9 - 0.65)^2 + (0.4 - 0.65)^2 + 0.1^2) = 0.5 * 0.135.
    EXPECT_NEAR(o.objective, 0.0675, 1e-15);
    EXPECT_NEAR(o.alpha, 0.65, 1e-15);
    EXPECT_EQ(o.codes, (std::vector<int>{1, 1, 0}));
}

TEST(OracleTernary, RepresentableAndSingleton) {
    const TernaryOptimum a = oracle_ternary(Vec{0.3, 0.0, -0.3, 0.3}, Vec{1, 2, 3, 4});
    EXPECT_NEAR(a.objective, 0.0, 1e-30);
    const TernaryOptimum b = oracle_ternary(Vec{0.5}, Vec{3});
    EXPECT_EQ(b.alpha, 0.5);
    EXPECT_EQ(b.codes, std::vector<int>{1});
    EXPECT_EQ(b.objective, 0.0);
}

TEST(OracleTernary, TooLarge) {
    try {
        oracle_ternary(Vec(13, 0.1), Vec(13, 1.0));
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TooLarge);
    }
}

TEST(OracleTwn, WorkedExample) {
    const TwnOptimum o = oracle_twn_threshold(Vec{0.9, 0.4, -0.1});
    EXPECT_EQ(o.delta, 0.1);
    EXPECT_NEAR(o.alpha, 0.65, 1e-15);
    EXPECT_EQ(o.codes, (std::vector<int>{1, 1, 0}));
    EXPECT_EQ(oracle_twn_threshold(Vec{-0.3}).alpha, 0.3);
    const TwnOptimum eq = oracle_twn_threshold(Vec{0.2, -0.2, 0.2});
    EXPECT_NEAR(eq.alpha, 0.2, 1e-15);
    EXPECT_EQ(eq.codes, (std::vector<int>{1, -1, 1}));
    EXPECT_THROW(oracle_twn_threshold(Vec{0, 0}), Error);
}

TEST(OracleTwoScale, WorkedExample) {
    const TwoScaleOptimum o = oracle_two_scale(Vec{0.9, 0.4, -0.5, -0.1}, Vec{1, 1, 1, 1});
    EXPECT_NEAR(o.alpha, 0.65, 1e-15);
    EXPECT_NEAR(o.beta, 0.5, 1e-15);
    EXPECT_EQ(o.p, (std::vector<int>{1, 1, 0, 0}));
    EXPECT_EQ(o.q, (std::vector<int>{0, 0, -1, 0}));
}

TEST(OracleTwoScale, AllPositiveMatchesNonnegativeTernary) {
    const Vec w{0.9, 0.4, 0.1, 0.7};
    const Vec d{1, 3, 2, 0.5};
    const TwoScaleOptimum o = oracle_two_scale(w, d);
    EXPECT_EQ(o.beta, 0.0);
    for (int q : o.q) EXPECT_EQ(q, 0);
    // With all weights positive the unrestricted ternary optimum never uses -1.
    const TernaryOptimum t = oracle_ternary(w, d);
    EXPECT_NEAR(o.objective, t.objective, 1e-15);
    EXPECT_NEAR(oracle_two_scale(Vec{0.4, -0.4}, Vec{1, 7}).objective, 0.0, 1e-30);
}

TEST(OracleGrid, TernaryAgreesWithEnumeration) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(8);
        Vec w(n), d(n);
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = rng.uniform(-1, 1);
            d[i] = rng.uniform(0.1, 10);
        }
        const GridOptimum g = oracle_alpha_grid(w, d, QuantSet::ternary(), 100000);
        const TernaryOptimum t = oracle_ternary(w, d);
        EXPECT_GE(g.objective, t.objective - 1e-12);
        EXPECT_LE(g.objective, t.objective + 1e-6);
    }
}

TEST(OracleGrid, RepresentableAndRefinement) {
    const QuantSet q = QuantSet::build(3, Scheme::Log);
    const double a0 = 0.5;
    const Vec w{a0, a0 / 2, -a0 / 4};
    const Vec d{1, 1, 1};
    // a0 = 0.5 is the grid point 25000 of 100000 over (0, 2].
    EXPECT_NEAR(oracle_alpha_grid(w, d, q, 100000).objective, 0.0, 1e-20);
    const Vec v{0.9, 0.35, -0.15, 0.6};
    double prev = oracle_alpha_grid(v, Vec{1, 2, 3, 4}, q, 1000).objective;
    for (std::size_t res : {2000, 4000, 8000}) {
        const double now = oracle_alpha_grid(v, Vec{1, 2, 3, 4}, q, res).objective;
        EXPECT_LE(now, prev);
        prev = now;
    }
    EXPECT_THROW(oracle_alpha_grid(v, Vec{1, 2, 3, 4}, q, 999), Error);
}

TEST(FiniteDiff, QuadraticAndLinear) {
    const Vec x{0.3, -1.2, 2.5};
    const Vec g = finite_diff_grad(
        [](std::span<const double> v) {
            double s = 0.0;
            for (double a : v) s += 0.5 * a * a;
            return s;
        },
        x, 1e-4);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(g[i], x[i], 1e-9);
    const Vec c{2.0, -0.5, 0.25};
    const Vec gl = finite_diff_grad(
        [&](std::span<const double> v) { return c[0] * v[0] + c[1] * v[1] + c[2] * v[2]; }, x, 0.5);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(gl[i], c[i], 1e-14);
    EXPECT_THROW(finite_diff_grad([](std::span<const double>) { return 0.0; }, x, 0.0), Error);
}

TEST(Suites, SmallRunsPass) {
    SuiteOptions opts;
    opts.trials = 50;
    opts.seed = 7;
    for (Suite s : {Suite::OracleTwoScale, Suite::TwnReduction, Suite::Properties}) {
        const OracleReport r = run_suite(s, opts);
        EXPECT_TRUE(r.passed()) << to_string(s) << ": " << (r.failures.empty() ? "" : r.failures[0].description);
        EXPECT_EQ(r.trials, 50u);
    }
}

// The approximate solver's 1% quality fraction is an aggregate that can
// fall short on small samples; every per-instance check must still hold.
TEST(Suites, TernaryPerInstanceChecksPass) {
    SuiteOptions opts;
    opts.trials = 50;
    opts.seed = 7;
    const OracleReport r = run_suite(Suite::OracleTernary, opts);
    for (const Failure& f : r.failures) EXPECT_EQ(f.description.rfind("approx within 1%", 0), 0u) << f.description;
}

TEST(Suites, ReportIsOrderIndependent) {
    SuiteOptions opts;
    opts.trials = 30;
    opts.seed = 11;
    const OracleReport a = run_suite(Suite::OracleTernary, opts);
    const OracleReport b = run_suite(Suite::OracleTernary, opts);
    EXPECT_EQ(a.max_abs_gap, b.max_abs_gap);
    EXPECT_EQ(a.max_rel_gap, b.max_rel_gap);
    EXPECT_EQ(a.stats, b.stats);
}

TEST(Suites, ParseNames) {
    for (Suite s : {Suite::OracleTernary, Suite::OracleTwoScale, Suite::OracleMbit, Suite::TwnReduction,
                    Suite::Gradcheck, Suite::Properties}) {
        EXPECT_EQ(parse_suite(to_string(s)), s);
    }
    EXPECT_THROW(parse_suite("oracle"), Error);
}

TEST(Suites, CsvLayout) {
    OracleReport r;
    r.suite = "x";
    r.trials = 2;
    r.stats = {{"s", 0.5}};
    r.failures = {{1, 2, "bad"}};
    const std::string csv = report_csv(r);
    EXPECT_EQ(csv.rfind("suite,trials,failures,max_abs_gap,max_rel_gap,wall_time\n", 0), 0u);
    EXPECT_NE(csv.find("stat,s,0.5\n"), std::string::npos);
    EXPECT_NE(csv.find("failure,1,2,bad\n"), std::string::npos);
}

}  // namespace
}  // namespace lawq::oracle
