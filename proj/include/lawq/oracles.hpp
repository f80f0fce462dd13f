#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lawq/qset.hpp"

// Brute-force reference solvers.  Nothing here calls into the quantizer
// kernels: every objective is evaluated from 0.5 * sum d_i (w_hat_i - w_i)^2.
namespace lawq::oracle {

inline constexpr std::size_t kMaxEnumeration = 12;

struct TernaryOptimum {
    double objective = 0.0;
    double alpha = 0.0;
    std::vector<int> codes;
};

// Enumerates all 3^n code patterns (n <= 12).
TernaryOptimum oracle_ternary(std::span<const double> w, std::span<const double> d);

struct TwnOptimum {
    double delta = 0.0;
    double alpha = 0.0;
    std::vector<int> codes;  // I_delta(w)
};

// Maximizes (sum_{|w_i| > D} |w_i|)^2 / #{|w_i| > D} over D in {0} and {|w_i|}.
TwnOptimum oracle_twn_threshold(std::span<const double> w);

struct TwoScaleOptimum {
    double objective = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<int> p;  // {0, 1}
    std::vector<int> q;  // {-1, 0}
};

// Independent subset enumeration of the positive and negative parts.
TwoScaleOptimum oracle_two_scale(std::span<const double> w, std::span<const double> d);

struct GridOptimum {
    double objective = 0.0;
    double alpha = 0.0;
    std::vector<double> levels;  // chosen element of Q per weight
};

// Sweeps alpha over (0, 2 max|w|] at `resolution` uniform points, projecting
// w / alpha onto Q by exhaustive nearest-element search at each point.
GridOptimum oracle_alpha_grid(std::span<const double> w, std::span<const double> d, const QuantSet& qset,
                              std::size_t resolution = 100000);

// Q built directly from its definition, without QuantSet.
std::vector<double> reference_levels(QuantKind kind, int bits);

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& loss,
                                     std::span<const double> point, double h);

struct Failure {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    std::string description;
};

struct OracleReport {
    std::string suite;
    std::size_t trials = 0;
    double max_abs_gap = 0.0;
    double max_rel_gap = 0.0;
    std::vector<Failure> failures;
    // Suite-specific aggregates (median iterations, pass fractions, ...).
    std::vector<std::pair<std::string, double>> stats;
    double wall_time = 0.0;

    bool passed() const noexcept { return failures.empty(); }
    void record_gap(double abs_gap, double rel_gap);
};

enum class Suite { OracleTernary, OracleTwoScale, OracleMbit, TwnReduction, Gradcheck, Properties };

Suite parse_suite(std::string_view name);
std::string_view to_string(Suite suite) noexcept;

struct SuiteOptions {
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    std::size_t grid_resolution = 100000;
};

OracleReport run_suite(Suite suite, const SuiteOptions& options);

// Header "suite,trials,failures,max_abs_gap,max_rel_gap,wall_time" and its
// row, then "stat,<name>,<value>" and "failure,<seed>,<trial>,<description>"
// lines.
std::string report_csv(const OracleReport& report);

}  // namespace lawq::oracle
