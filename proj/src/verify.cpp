#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "lawq/error.hpp"
#include "lawq/format.hpp"
#include "lawq/methods.hpp"
#include "lawq/nn/network.hpp"
#include "lawq/oracles.hpp"
#include "lawq/quantizers.hpp"
#include "lawq/rng.hpp"

namespace lawq::oracle {

namespace {

constexpr double kObjectiveRelTol = 1e-9;
constexpr double kDominanceTol = 1e-12;
constexpr double kGridSlack = 1e-6;
constexpr double kScaleRelTol = 1e-12;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradFloor = 1e-8;
constexpr double kGradStep = 1e-5;
// Objectives this small are both rounding noise around an exact fit.
constexpr double kZeroObjective = 1e-15;

struct Instance {
    std::vector<double> w;
    std::vector<double> d;
};

Instance random_instance(Rng& rng) {
    const int n = rng.between(1, 10);
    Instance inst;
    for (int i = 0; i < n; ++i) inst.w.push_back(rng.uniform(-1.0, 1.0));
    for (int i = 0; i < n; ++i) inst.d.push_back(rng.uniform(0.1, 10.0));
    return inst;
}

double rel_gap(double a, double b) {
    const double scale = std::max(std::fabs(a), std::fabs(b));
    return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

bool objectives_agree(double kernel, double reference) {
    const double gap = std::fabs(kernel - reference);
    return gap <= kObjectiveRelTol * std::max(std::fabs(kernel), std::fabs(reference)) || gap <= kZeroObjective;
}

bool non_increasing(const std::vector<double>& trace) {
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i] > trace[i - 1]) return false;
    }
    return true;
}

std::string join(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_double(v[i]);
    return out + "]";
}

std::string describe(const Instance& inst) { return "w=" + join(inst.w) + " d=" + join(inst.d); }

// Per-trial outcome collected in trial order so reports do not depend on
// thread scheduling.
struct Outcome {
    double abs_gap = 0.0;
    double rel_gap = 0.0;
    std::vector<std::string> failures;
    std::vector<double> values;  // suite-specific samples
};

template <class F>
std::vector<Outcome> run_trials(std::size_t trials, F&& body) {
    std::vector<Outcome> out(trials);
    std::atomic<std::size_t> next{0};
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), trials));
    auto work = [&] {
        for (std::size_t t = next++; t < trials; t = next++) out[t] = body(t);
    };
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(work);
    work();
    for (std::thread& th : pool) th.join();
    return out;
}

Outcome ternary_trial(std::uint64_t seed, std::uint64_t trial) {
    Rng rng = Rng::derive(seed, trial);
    const Instance inst = random_instance(rng);
    Outcome o;
    const TernaryOptimum best = oracle_ternary(inst.w, inst.d);
    const ExactResult exact = ternarize_exact(inst.w, inst.d);
    const double obj = quantization_objective(inst.w, inst.d, exact.layer);
    o.abs_gap = std::fabs(obj - best.objective);
    o.rel_gap = rel_gap(obj, best.objective);
    if (!objectives_agree(obj, best.objective)) {
        o.failures.push_back("exact objective " + format_double(obj) + " vs oracle " +
                             format_double(best.objective) + " " + describe(inst));
    }

    const QuantResult approx = ternarize_approx(inst.w, inst.d, binarize_sign(inst.w).codes);
    const double approx_obj = quantization_objective(inst.w, inst.d, approx.layer);
    if (approx.info.iterations > 100 || !approx.info.converged) {
        o.failures.push_back("approx did not converge in 100 iterations " + describe(inst));
    }
    if (!non_increasing(approx.info.objective_trace)) {
        o.failures.push_back("approx objective increased " + join(approx.info.objective_trace) + " " + describe(inst));
    }
    const bool within = approx_obj <= 1.01 * obj || approx_obj - obj <= kZeroObjective;
    o.values = {static_cast<double>(approx.info.iterations), within ? 1.0 : 0.0};
    return o;
}

Outcome twn_trial(std::uint64_t seed, std::uint64_t trial) {
    Rng rng = Rng::derive(seed, trial);
    Instance inst = random_instance(rng);
    const double lambda = rng.uniform(0.1, 10.0);
    std::fill(inst.d.begin(), inst.d.end(), lambda);
    Outcome o;
    const TwnOptimum twn = oracle_twn_threshold(inst.w);
    const ExactResult exact = ternarize_exact(inst.w, inst.d);
    const QuantizedLayer& layer = exact.layer;
    o.abs_gap = std::fabs(layer.alpha - twn.alpha);
    o.rel_gap = rel_gap(layer.alpha, twn.alpha);
    if (o.rel_gap > kObjectiveRelTol) {
        o.failures.push_back("alpha " + format_double(layer.alpha) + " vs TWN argmax " + format_double(twn.alpha) +
                             " " + describe(inst));
    }
    bool same_support = true;
    bool consistent = true;
    for (std::size_t i = 0; i < inst.w.size(); ++i) {
        same_support &= static_cast<int>(layer.codes[i]) == twn.codes[i];
        const int expect = inst.w[i] > layer.alpha / 2 ? 1 : (inst.w[i] < -layer.alpha / 2 ? -1 : 0);
        consistent &= static_cast<int>(layer.codes[i]) == expect;
    }
    if (!same_support) o.failures.push_back("support differs from TWN argmax " + describe(inst));
    if (!consistent) o.failures.push_back("codes differ from I_{alpha/2}(w) " + describe(inst));
    return o;
}

Outcome two_scale_trial(std::uint64_t seed, std::uint64_t trial) {
    Rng rng = Rng::derive(seed, trial);
    const Instance inst = random_instance(rng);
    Outcome o;
    const TwoScaleOptimum best = oracle_two_scale(inst.w, inst.d);
    const QuantResult two = ternarize_two_scale_exact(inst.w, inst.d);
    const double obj = quantization_objective(inst.w, inst.d, two.layer);
    o.abs_gap = std::fabs(obj - best.objective);
    o.rel_gap = rel_gap(obj, best.objective);
    if (!objectives_agree(obj, best.objective)) {
        o.failures.push_back("two-scale objective " + format_double(obj) + " vs oracle " +
                             format_double(best.objective) + " " + describe(inst));
    }
    const double one = quantization_objective(inst.w, inst.d, ternarize_exact(inst.w, inst.d).layer);
    if (obj > one + kDominanceTol) {
        o.failures.push_back("two-scale objective " + format_double(obj) + " exceeds one-scale " +
                             format_double(one) + " " + describe(inst));
    }
    return o;
}

struct MbitConfig {
    int bits;
    Scheme scheme;
};
constexpr MbitConfig kMbitConfigs[] = {{3, Scheme::Linear}, {3, Scheme::Log}, {4, Scheme::Linear}, {4, Scheme::Log}};

Outcome mbit_trial(std::uint64_t seed, std::uint64_t trial, std::size_t resolution) {
    Rng rng = Rng::derive(seed, trial);
    const Instance inst = random_instance(rng);
    Outcome o;
    for (const MbitConfig& cfg : kMbitConfigs) {
        const QuantSet qset = QuantSet::build(cfg.bits, cfg.scheme);
        const QuantResult r = quantize_mbit(inst.w, inst.d, qset, {});
        const std::string tag = std::to_string(cfg.bits) + "-bit " + std::string(to_string(cfg.scheme));
        if (!non_increasing(r.info.objective_trace)) {
            o.failures.push_back(tag + " objective increased " + join(r.info.objective_trace) + " " + describe(inst));
        }
        const double obj = quantization_objective(inst.w, inst.d, r.layer);
        const GridOptimum grid = oracle_alpha_grid(inst.w, inst.d, qset, resolution);
        const double excess = obj - grid.objective;
        o.abs_gap = std::max(o.abs_gap, std::max(excess, 0.0));
        o.rel_gap = std::max(o.rel_gap, excess > 0 ? rel_gap(obj, grid.objective) : 0.0);
        o.values.push_back(obj <= grid.objective + kGridSlack ? 1.0 : 0.0);
    }

    // Two bits: the m-bit alternation must retrace the ternary one exactly.
    const std::vector<Code> init = binarize_sign(inst.w).codes;
    const QuantResult m2 = quantize_mbit(inst.w, inst.d, QuantSet::build(2, Scheme::Linear), init);
    const QuantResult ta = ternarize_approx(inst.w, inst.d, init);
    if (m2.info.objective_trace != ta.info.objective_trace || m2.layer.alpha != ta.layer.alpha ||
        m2.layer.codes != ta.layer.codes) {
        o.failures.push_back("2-bit iterates differ from ternary alternation " + describe(inst));
    }
    return o;
}

// Runs one solver on (w, d) and returns the layer.
using Solver = QuantizedLayer (*)(std::span<const double>, std::span<const double>);

QuantizedLayer solve_exact(std::span<const double> w, std::span<const double> d) { return ternarize_exact(w, d).layer; }
QuantizedLayer solve_approx(std::span<const double> w, std::span<const double> d) {
    return ternarize_approx(w, d, {}).layer;
}
QuantizedLayer solve_two_exact(std::span<const double> w, std::span<const double> d) {
    return ternarize_two_scale_exact(w, d).layer;
}
QuantizedLayer solve_two_approx(std::span<const double> w, std::span<const double> d) {
    return ternarize_two_scale_approx(w, d, {}).layer;
}
QuantizedLayer solve_mbit_linear(std::span<const double> w, std::span<const double> d) {
    return quantize_mbit(w, d, QuantSet::build(3, Scheme::Linear), {}).layer;
}
QuantizedLayer solve_mbit_log(std::span<const double> w, std::span<const double> d) {
    return quantize_mbit(w, d, QuantSet::build(3, Scheme::Log), {}).layer;
}

struct NamedSolver {
    const char* name;
    Solver solve;
};
constexpr NamedSolver kSolvers[] = {{"exact", solve_exact},           {"approx", solve_approx},
                                    {"two-scale-exact", solve_two_exact}, {"two-scale-approx", solve_two_approx},
                                    {"mbit3-linear", solve_mbit_linear},  {"mbit3-log", solve_mbit_log}};

bool scales_match(double expected, double got) { return rel_gap(expected, got) <= kScaleRelTol; }

// Compares `got` with `base` after mapping base through (scale factor, permutation).
std::string compare_layers(const QuantizedLayer& base, const QuantizedLayer& got, double factor,
                           const std::vector<std::size_t>& perm, double& worst) {
    const double a = factor * base.alpha;
    worst = std::max(worst, rel_gap(a, got.alpha));
    if (!scales_match(a, got.alpha)) return "alpha " + format_double(got.alpha) + " expected " + format_double(a);
    if (base.beta.has_value() != got.beta.has_value()) return "beta presence differs";
    if (base.beta) {
        const double b = factor * *base.beta;
        worst = std::max(worst, rel_gap(b, *got.beta));
        if (!scales_match(b, *got.beta)) return "beta " + format_double(*got.beta) + " expected " + format_double(b);
    }
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (got.codes[i] != base.codes[perm[i]]) return "codes differ at " + std::to_string(i);
    }
    return {};
}

Outcome properties_trial(std::uint64_t seed, std::uint64_t trial) {
    Rng rng = Rng::derive(seed, trial);
    const Instance inst = random_instance(rng);
    const std::size_t n = inst.w.size();
    const double gamma = rng.uniform(0.1, 10.0);
    const double kappa = rng.uniform(0.1, 10.0);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm.begin(), perm.end());
    std::vector<std::size_t> identity(n);
    for (std::size_t i = 0; i < n; ++i) identity[i] = i;

    std::vector<double> w_scaled(n), d_scaled(n), w_perm(n), d_perm(n);
    for (std::size_t i = 0; i < n; ++i) {
        w_scaled[i] = gamma * inst.w[i];
        d_scaled[i] = kappa * inst.d[i];
        w_perm[i] = inst.w[perm[i]];
        d_perm[i] = inst.d[perm[i]];
    }

    Outcome o;
    double worst = 0.0;
    for (const NamedSolver& s : kSolvers) {
        const QuantizedLayer base = s.solve(inst.w, inst.d);
        const std::string homog = compare_layers(base, s.solve(w_scaled, inst.d), gamma, identity, worst);
        if (!homog.empty()) o.failures.push_back(std::string(s.name) + " homogeneity: " + homog + " " + describe(inst));
        const std::string curv = compare_layers(base, s.solve(inst.w, d_scaled), 1.0, identity, worst);
        if (!curv.empty()) o.failures.push_back(std::string(s.name) + " curvature scale: " + curv + " " + describe(inst));
        const std::string perm_msg = compare_layers(base, s.solve(w_perm, d_perm), 1.0, perm, worst);
        if (!perm_msg.empty()) {
            o.failures.push_back(std::string(s.name) + " permutation: " + perm_msg + " " + describe(inst));
        }
    }
    o.rel_gap = worst;
    return o;
}

// Gradient check of the quantized forward graph.  The layer quantization is
// computed once and then frozen; the differenced variables are the entries
// of the quantized weights and the batch-norm parameters.
Outcome gradcheck_trial(std::uint64_t seed, std::uint64_t trial) {
    using nn::Matrix;
    Rng rng = Rng::derive(seed, trial);
    const std::size_t hidden[] = {10};
    const std::vector<nn::LayerSpec> specs = nn::mlp(20, hidden, 5, true);
    nn::Network net = nn::Network::init(specs, rng, 0.5);
    for (nn::Layer& layer : net.layers) {
        for (Eigen::Index j = 0; j < layer.bn.gamma.size(); ++j) {
            layer.bn.gamma[j] = rng.uniform(0.5, 1.5);
            layer.bn.beta[j] = rng.uniform(-0.5, 0.5);
        }
    }
    constexpr Eigen::Index batch = 32;
    Matrix x(batch, 20);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    std::vector<int> labels(batch);
    for (int& y : labels) y = static_cast<int>(rng.below(5));

    std::vector<nn::EffectiveWeights> eff;
    for (const nn::Layer& layer : net.layers) {
        std::vector<double> d(static_cast<std::size_t>(layer.w.size()));
        for (double& v : d) v = rng.uniform(0.1, 10.0);
        const LayerQuantization q = quantize_with({Method::LatExact}, {layer.w.data(), d.size()}, d, {});
        eff.push_back(nn::effective_weights(q, static_cast<std::size_t>(layer.w.rows()),
                                            static_cast<std::size_t>(layer.w.cols())));
    }
    const nn::ForwardResult fwd = nn::forward(net, eff, x, true);
    const nn::LossResult loss = nn::square_hinge_loss(fwd.scores, labels);
    const std::vector<nn::LayerGrads> grads = nn::backward(net, eff, fwd, loss.grad);

    std::vector<double> point;
    std::vector<double> analytic;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Matrix dense = eff[l].input_scale * eff[l].values;
        point.insert(point.end(), dense.data(), dense.data() + dense.size());
        analytic.insert(analytic.end(), grads[l].w_hat.data(), grads[l].w_hat.data() + grads[l].w_hat.size());
    }
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const nn::BatchNormParams& bn = net.layers[l].bn;
        point.insert(point.end(), bn.gamma.data(), bn.gamma.data() + bn.gamma.size());
        analytic.insert(analytic.end(), grads[l].gamma.data(), grads[l].gamma.data() + grads[l].gamma.size());
        point.insert(point.end(), bn.beta.data(), bn.beta.data() + bn.beta.size());
        analytic.insert(analytic.end(), grads[l].beta.data(), grads[l].beta.data() + grads[l].beta.size());
    }

    // ReLU and hinge activity seen by each loss evaluation; a coordinate whose
    // +h and -h evaluations disagree straddles a kink and is reported apart.
    std::vector<std::vector<bool>> masks;
    auto loss_at = [&](std::span<const double> p) {
        nn::Network probe = net;
        std::vector<nn::EffectiveWeights> dense;
        std::size_t pos = 0;
        for (const nn::Layer& layer : probe.layers) {
            Matrix w(layer.w.rows(), layer.w.cols());
            std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(pos), w.size(), w.data());
            pos += static_cast<std::size_t>(w.size());
            dense.push_back(nn::dense_weights(w));
        }
        for (nn::Layer& layer : probe.layers) {
            for (Eigen::Index j = 0; j < layer.bn.gamma.size(); ++j) layer.bn.gamma[j] = p[pos++];
            for (Eigen::Index j = 0; j < layer.bn.beta.size(); ++j) layer.bn.beta[j] = p[pos++];
        }
        const nn::ForwardResult f = nn::forward(probe, dense, x, true);
        std::vector<bool> mask;
        for (std::size_t l = 0; l + 1 < f.layers.size(); ++l) {
            const Matrix& z = f.layers[l].pre_activation;
            for (Eigen::Index i = 0; i < z.size(); ++i) mask.push_back(z.data()[i] > 0.0);
        }
        // Active hinge terms: the loss is only once differentiable where a margin hits zero.
        for (Eigen::Index i = 0; i < f.scores.rows(); ++i) {
            for (Eigen::Index c = 0; c < f.scores.cols(); ++c) {
                const double y = c == labels[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
                mask.push_back(y * f.scores(i, c) < 1.0);
            }
        }
        masks.push_back(std::move(mask));
        return nn::square_hinge_loss(f.scores, labels).loss;
    };
    const std::vector<double> numeric = finite_diff_grad(loss_at, point, kGradStep);

    Outcome o;
    std::size_t kinks = 0;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < point.size(); ++i) {
        if (masks[2 * i] != masks[2 * i + 1]) {
            ++kinks;
            continue;
        }
        const double a = analytic[i];
        const double b = numeric[i];
        if (std::fabs(a) < kGradFloor && std::fabs(b) < kGradFloor) continue;
        ++checked;
        const double rel = rel_gap(a, b);
        o.abs_gap = std::max(o.abs_gap, std::fabs(a - b));
        o.rel_gap = std::max(o.rel_gap, rel);
        if (rel > kGradRelTol) {
            o.failures.push_back("coordinate " + std::to_string(i) + " analytic " + format_double(a) + " numeric " +
                                 format_double(b));
        }
    }
    o.values = {static_cast<double>(checked), static_cast<double>(kinks)};
    return o;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

Suite parse_suite(std::string_view name) {
    if (name == "oracle-ternary") return Suite::OracleTernary;
    if (name == "oracle-two-scale") return Suite::OracleTwoScale;
    if (name == "oracle-mbit") return Suite::OracleMbit;
    if (name == "twn-reduction") return Suite::TwnReduction;
    if (name == "gradcheck") return Suite::Gradcheck;
    if (name == "properties") return Suite::Properties;
    fail(ErrorCode::BadValue, "unknown suite '" + std::string(name) + "'");
}

std::string_view to_string(Suite suite) noexcept {
    switch (suite) {
        case Suite::OracleTernary: return "oracle-ternary";
        case Suite::OracleTwoScale: return "oracle-two-scale";
        case Suite::OracleMbit: return "oracle-mbit";
        case Suite::TwnReduction: return "twn-reduction";
        case Suite::Gradcheck: return "gradcheck";
        case Suite::Properties: return "properties";
    }
    return "?";
}

OracleReport run_suite(Suite suite, const SuiteOptions& options) {
    if (options.trials == 0) fail(ErrorCode::InvalidArgument, "trials must be at least 1");
    const auto started = std::chrono::steady_clock::now();
    const std::uint64_t seed = options.seed;
    std::vector<Outcome> outcomes;
    switch (suite) {
        case Suite::OracleTernary:
            outcomes = run_trials(options.trials, [&](std::size_t t) { return ternary_trial(seed, t); });
            break;
        case Suite::OracleTwoScale:
            outcomes = run_trials(options.trials, [&](std::size_t t) { return two_scale_trial(seed, t); });
            break;
        case Suite::OracleMbit:
            outcomes = run_trials(options.trials,
                                  [&](std::size_t t) { return mbit_trial(seed, t, options.grid_resolution); });
            break;
        case Suite::TwnReduction:
            outcomes = run_trials(options.trials, [&](std::size_t t) { return twn_trial(seed, t); });
            break;
        case Suite::Gradcheck:
            outcomes = run_trials(options.trials, [&](std::size_t t) { return gradcheck_trial(seed, t); });
            break;
        case Suite::Properties:
            outcomes = run_trials(options.trials, [&](std::size_t t) { return properties_trial(seed, t); });
            break;
    }

    OracleReport report;
    report.suite = std::string(to_string(suite));
    report.trials = options.trials;
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
        report.record_gap(outcomes[t].abs_gap, outcomes[t].rel_gap);
        for (std::string& msg : outcomes[t].failures) report.failures.push_back({seed, t, std::move(msg)});
    }

    const double trials = static_cast<double>(options.trials);
    if (suite == Suite::OracleTernary) {
        std::vector<double> iterations;
        double within = 0.0;
        for (const Outcome& o : outcomes) {
            iterations.push_back(o.values[0]);
            within += o.values[1];
        }
        const double med = median(iterations);
        report.stats.emplace_back("approx_median_iterations", med);
        report.stats.emplace_back("approx_max_iterations", *std::max_element(iterations.begin(), iterations.end()));
        report.stats.emplace_back("approx_within_1pct_fraction", within / trials);
        if (med > 10.0) report.failures.push_back({seed, 0, "approx median iterations " + format_double(med) + " > 10"});
        if (within / trials < 0.95) {
            report.failures.push_back(
                {seed, 0, "approx within 1% of exact on only " + format_double(within / trials) + " of trials"});
        }
    } else if (suite == Suite::OracleMbit) {
        for (std::size_t c = 0; c < std::size(kMbitConfigs); ++c) {
            double hits = 0.0;
            for (const Outcome& o : outcomes) hits += o.values[c];
            const std::string name = "grid_pass_fraction_" + std::to_string(kMbitConfigs[c].bits) + "bit_" +
                                     std::string(to_string(kMbitConfigs[c].scheme));
            report.stats.emplace_back(name, hits / trials);
            if (hits / trials < 0.99) {
                report.failures.push_back({seed, 0, name + " = " + format_double(hits / trials) + " < 0.99"});
            }
        }
    } else if (suite == Suite::Gradcheck) {
        double checked = 0.0;
        double kinks = 0.0;
        for (const Outcome& o : outcomes) {
            checked += o.values[0];
            kinks += o.values[1];
        }
        report.stats.emplace_back("coordinates_checked", checked);
        report.stats.emplace_back("coordinates_at_kink", kinks);
    }
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

std::string report_csv(const OracleReport& report) {
    std::ostringstream out;
    out << "suite,trials,failures,max_abs_gap,max_rel_gap,wall_time\n";
    out << report.suite << ',' << report.trials << ',' << report.failures.size() << ','
        << format_double(report.max_abs_gap) << ',' << format_double(report.max_rel_gap) << ','
        << format_double(report.wall_time) << '\n';
    for (const auto& [name, value] : report.stats) out << "stat," << name << ',' << format_double(value) << '\n';
    for (const Failure& f : report.failures) {
        std::string desc = f.description;
        std::replace(desc.begin(), desc.end(), ',', ';');
        out << "failure," << f.seed << ',' << f.trial << ',' << desc << '\n';
    }
    return out.str();
}

}  // namespace lawq::oracle
