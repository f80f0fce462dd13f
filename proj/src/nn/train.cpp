#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "lawq/error.hpp"
#include "lawq/nn/train.hpp"

namespace lawq::nn {

namespace {

using Clock = std::chrono::steady_clock;

std::span<const double> as_span(const Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// A layer whose weights all sit at zero has no scale to fit; it is carried
// as an all-zero layer and counted, rather than stopping the run.
LayerQuantization degenerate_layer(const MethodSpec& spec, std::size_t n) {
    LayerQuantization q;
    if (spec.uses_codes()) {
        QuantizedLayer layer;
        layer.codes.assign(n, 0);
        if (spec.method == Method::Laq) layer.qset = QuantSet::build(spec.bits, spec.scheme);
        if (spec.method == Method::Lat2Exact || spec.method == Method::Lat2Approx) layer.beta = 0.0;
        q.layer = std::move(layer);
    }
    q.w_hat.assign(n, 0.0);
    q.info.degenerate = true;
    return q;
}

void adam_update(OptimizerState& opt, std::span<double> param, std::span<const double> grad, const AdamHyper& hyper,
                 std::vector<double>* curvature_out) {
    AdamStepResult r = adam_step(opt, grad, hyper);
    std::vector<double> d = curvature_from_moments(r.v_hat, hyper.learning_rate, hyper.epsilon);
    std::vector<double> next = precond_step(param, r.m_hat, d);
    std::copy(next.begin(), next.end(), param.begin());
    opt = std::move(r.state);
    if (curvature_out) *curvature_out = std::move(d);
}

void update_vector(OptimizerState& opt, Vector& param, const Vector& grad, const AdamHyper& hyper) {
    if (param.size() == 0) return;
    adam_update(opt, {param.data(), static_cast<std::size_t>(param.size())}, as_span(grad), hyper, nullptr);
}

std::vector<EffectiveWeights> effective_all(const TrainState& state, std::span<const LayerQuantization> quant) {
    std::vector<EffectiveWeights> eff;
    eff.reserve(quant.size());
    for (std::size_t l = 0; l < quant.size(); ++l) {
        const Matrix& w = state.net.layers[l].w;
        eff.push_back(effective_weights(quant[l], static_cast<std::size_t>(w.rows()),
                                        static_cast<std::size_t>(w.cols())));
    }
    return eff;
}

std::vector<std::optional<double>> alphas(std::span<const LayerQuantization> quant) {
    std::vector<std::optional<double>> out;
    for (const LayerQuantization& q : quant) {
        out.push_back(q.layer ? std::optional<double>(q.layer->alpha) : std::nullopt);
    }
    return out;
}

}  // namespace

double lr_schedule(std::size_t epoch, const Schedule& schedule) {
    std::size_t decays = 0;
    if (schedule.kind == Schedule::Kind::Milestone) {
        for (std::size_t m : schedule.milestones) decays += m <= epoch ? 1 : 0;
    } else if (epoch >= schedule.start) {
        decays = (epoch - schedule.start) / std::max<std::size_t>(schedule.every, 1) + 1;
    }
    return schedule.initial * std::pow(schedule.factor, static_cast<double>(decays));
}

void TrainConfig::validate() const {
    if (epochs < 1) fail(ErrorCode::BadValue, "epochs must be at least 1");
    if (batch_size < 1) fail(ErrorCode::BadValue, "batch size must be at least 1");
    if (batch_norm && batch_size < 2) fail(ErrorCode::BadValue, "batch norm needs a batch size of at least 2");
    if (!(schedule.initial > 0.0)) fail(ErrorCode::BadValue, "initial learning rate must be positive");
    if (!(schedule.factor > 0.0)) fail(ErrorCode::BadValue, "decay factor must be positive");
    if (schedule.kind == Schedule::Kind::Geometric && schedule.every < 1) {
        fail(ErrorCode::BadValue, "geometric decay period must be at least 1");
    }
    if (!(init_range > 0.0)) fail(ErrorCode::BadValue, "init range must be positive");
    if (!(gradient_clip > 0.0)) fail(ErrorCode::BadValue, "gradient clip must be positive");
    if (alternation.max_iterations < 1) fail(ErrorCode::BadValue, "max iterations must be at least 1");
    if (!(alternation.tolerance > 0.0)) fail(ErrorCode::BadValue, "tolerance must be positive");
    if (method.method == Method::Laq) QuantSet::build(method.bits, method.scheme);
    if (method.method == Method::Dorefa && (method.bits < 2 || method.bits > 16)) {
        fail(ErrorCode::InvalidBits, "DoReFa bits must lie in [2, 16]");
    }
    AdamHyper check = adam;
    check.learning_rate = schedule.initial;
    check.validate();
}

TrainState init_state(const TrainConfig& config, std::size_t inputs, std::size_t classes) {
    Rng rng = Rng::derive(config.seed, 0);
    const std::vector<LayerSpec> specs = mlp(inputs, config.hidden, classes, config.batch_norm);
    TrainState state;
    state.net = Network::init(specs, rng, config.init_range);
    for (const Layer& layer : state.net.layers) {
        const auto n = static_cast<std::size_t>(layer.w.size());
        ParamState p;
        p.w = OptimizerState::zeros(n);
        p.bias = OptimizerState::zeros(static_cast<std::size_t>(layer.bias.size()));
        p.gamma = OptimizerState::zeros(static_cast<std::size_t>(layer.bn.gamma.size()));
        p.beta = OptimizerState::zeros(static_cast<std::size_t>(layer.bn.beta.size()));
        state.optim.push_back(std::move(p));
        // No update has produced a curvature yet; start from d = 1.
        state.curvature.emplace_back(n, 1.0);
        state.quant.emplace_back();
    }
    if (config.method.clips_weights()) {
        for (Layer& layer : state.net.layers) layer.w = layer.w.cwiseMax(-1.0).cwiseMin(1.0);
    }
    return state;
}

std::vector<LayerQuantization> quantize_network(const TrainConfig& config, const TrainState& state) {
    std::vector<LayerQuantization> out;
    out.reserve(state.net.layers.size());
    for (std::size_t l = 0; l < state.net.layers.size(); ++l) {
        const std::span<const double> w = as_span(state.net.layers[l].w);
        std::span<const Code> prev;
        if (l < state.quant.size() && state.quant[l].layer && !state.quant[l].info.degenerate) {
            prev = state.quant[l].layer->codes;
        }
        try {
            out.push_back(quantize_with(config.method, w, state.curvature[l], prev, config.alternation));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateInput) throw;
            out.push_back(degenerate_layer(config.method, w.size()));
        }
    }
    return out;
}

Evaluation evaluate(const TrainConfig& config, TrainState& state, std::span<const LayerQuantization> quant,
                    const Dataset& data) {
    Evaluation out;
    if (data.empty()) return out;
    const std::vector<EffectiveWeights> eff = effective_all(state, quant);
    constexpr std::size_t chunk = 1000;
    double loss = 0.0;
    std::size_t errors = 0;
    for (std::size_t start = 0; start < data.size(); start += chunk) {
        const std::size_t count = std::min(chunk, data.size() - start);
        const Matrix x = data.x.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(count));
        const ForwardResult fwd = forward(state.net, eff, x, false);
        const LossResult r = compute_loss(config.loss, fwd.scores, std::span(data.y).subspan(start, count));
        loss += r.loss * static_cast<double>(count);
        errors += r.errors;
    }
    out.loss = loss / static_cast<double>(data.size());
    out.error_rate = static_cast<double>(errors) / static_cast<double>(data.size());
    return out;
}

TrainResult train(const TrainConfig& config, const DataSplits& data, const EpochCallback& on_epoch) {
    config.validate();
    const Dataset& tr = data.train;
    if (tr.empty()) fail(ErrorCode::InvalidArgument, "training set is empty");
    if (tr.classes < 2) fail(ErrorCode::InvalidArgument, "training set needs at least two classes");
    const std::size_t min_batch = config.batch_norm ? 2 : 1;
    if (tr.size() < min_batch) fail(ErrorCode::DegenerateBatch, "training set smaller than one usable batch");

    TrainResult result;
    result.state = init_state(config, static_cast<std::size_t>(tr.x.cols()), tr.classes);
    TrainState& state = result.state;
    const std::size_t layers = state.net.layers.size();
    const bool clip = config.method.clips_weights();

    std::vector<std::size_t> order(tr.size());
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const Clock::time_point started = Clock::now();
        AdamHyper hyper = config.adam;
        hyper.learning_rate = lr_schedule(epoch, config.schedule);

        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffler = Rng::derive(config.seed, epoch + 1);
        shuffler.shuffle(order.begin(), order.end());

        double loss_sum = 0.0;
        std::size_t errors = 0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t count = std::min(config.batch_size, order.size() - start);
            // A trailing batch too small for batch statistics is skipped.
            if (count < min_batch) break;
            const Dataset batch = tr.subset(std::span(order).subspan(start, count));

            state.quant = quantize_network(config, state);
            const std::vector<EffectiveWeights> eff = effective_all(state, state.quant);
            const ForwardResult fwd = forward(state.net, eff, batch.x, true);
            const LossResult loss = compute_loss(config.loss, fwd.scores, batch.y);
            std::vector<LayerGrads> grads = backward(state.net, eff, fwd, loss.grad);
            ++state.step;

            for (std::size_t l = 0; l < layers; ++l) {
                Layer& layer = state.net.layers[l];
                LayerGrads& g = grads[l];
                if (config.clip_gradients) {
                    const double c = config.gradient_clip;
                    g.w_hat = g.w_hat.cwiseMax(-c).cwiseMin(c);
                    if (g.bias.size()) g.bias = g.bias.cwiseMax(-c).cwiseMin(c);
                    if (g.gamma.size()) g.gamma = g.gamma.cwiseMax(-c).cwiseMin(c);
                    if (g.beta.size()) g.beta = g.beta.cwiseMax(-c).cwiseMin(c);
                }
                // The gradient taken at the quantized weights updates the shadow weights.
                adam_update(state.optim[l].w, {layer.w.data(), static_cast<std::size_t>(layer.w.size())},
                            as_span(g.w_hat), hyper, &state.curvature[l]);
                if (clip) layer.w = layer.w.cwiseMax(-1.0).cwiseMin(1.0);
                update_vector(state.optim[l].bias, layer.bias, g.bias, hyper);
                update_vector(state.optim[l].gamma, layer.bn.gamma, g.gamma, hyper);
                update_vector(state.optim[l].beta, layer.bn.beta, g.beta, hyper);

                const LayerQuantization& q = state.quant[l];
                StepRecord rec;
                rec.step = state.step;
                rec.epoch = epoch;
                rec.layer = l;
                if (q.layer) {
                    rec.alpha = q.layer->alpha;
                    rec.beta = q.layer->beta;
                }
                rec.iterations = q.info.iterations;
                rec.converged = q.info.converged;
                rec.degenerate = q.info.degenerate;
                result.degenerate_events += q.info.degenerate ? 1 : 0;
                result.trajectory.push_back(rec);
            }
            loss_sum += loss.loss * static_cast<double>(count);
            errors += loss.errors;
            seen += count;
        }

        const std::vector<LayerQuantization> quant = quantize_network(config, state);
        const double seconds = std::chrono::duration<double>(Clock::now() - started).count();
        result.epoch_seconds.push_back(seconds);
        const double reported = config.record_wall_time ? seconds : 0.0;
        const std::vector<std::optional<double>> alpha = alphas(quant);

        const std::size_t first_row = result.metrics.size();
        result.metrics.push_back({epoch, "train", loss_sum / static_cast<double>(seen),
                                  static_cast<double>(errors) / static_cast<double>(seen), alpha, reported});
        if (!data.val.empty()) {
            const Evaluation ev = evaluate(config, state, quant, data.val);
            result.metrics.push_back({epoch, "val", ev.loss, ev.error_rate, alpha, reported});
        }
        if (!data.test.empty()) {
            const Evaluation ev = evaluate(config, state, quant, data.test);
            result.metrics.push_back({epoch, "test", ev.loss, ev.error_rate, alpha, reported});
        }
        if (on_epoch) on_epoch(epoch, state, std::span(result.metrics).subspan(first_row));
        if (epoch + 1 == config.epochs) result.final_quant = quant;
    }
    return result;
}

}  // namespace lawq::nn
