#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lawq/curvature.hpp"
#include "lawq/nn/network.hpp"

namespace lawq::nn {

struct Dataset {
    Matrix x;  // one sample per row
    std::vector<int> y;
    std::size_t classes = 0;

    std::size_t size() const noexcept { return y.size(); }
    bool empty() const noexcept { return y.empty(); }
    Dataset subset(std::span<const std::size_t> rows) const;
};

struct DataSplits {
    Dataset train;
    Dataset val;  // may be empty
    Dataset test;
};

// Holds out round(fraction * n) samples of `train` for validation after a
// seeded shuffle.
DataSplits split_validation(Dataset train, Dataset test, double fraction, std::uint64_t seed);

// Points in [-1, 1]^2 labelled by x0 + x1 > 0, with |x0 + x1| < 0.1 rejected
// so the classes are separable with a margin.
Dataset make_separable_2d(std::size_t n, std::uint64_t seed);

// Class-conditional clusters for offline runs without IDX files.
Dataset make_synthetic(std::size_t n, std::size_t features, std::size_t classes, std::uint64_t seed);

struct Schedule {
    enum class Kind { Milestone, Geometric };
    Kind kind = Kind::Milestone;
    double initial = 0.01;
    double factor = 1.0;
    std::vector<std::size_t> milestones;  // Milestone: decay at each listed epoch
    std::size_t start = 0;                // Geometric: first decayed epoch
    std::size_t every = 1;                // Geometric: decay period
};

double lr_schedule(std::size_t epoch, const Schedule& schedule);

struct TrainConfig {
    MethodSpec method;
    AlternationOptions alternation;
    std::vector<std::size_t> hidden{128, 128};
    bool batch_norm = true;
    std::size_t epochs = 10;
    std::size_t batch_size = 100;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::SquareHinge;
    Schedule schedule;
    AdamHyper adam;
    bool clip_gradients = false;
    double gradient_clip = 5.0;
    double init_range = 0.08;
    bool record_wall_time = false;

    void validate() const;
};

struct ParamState {
    OptimizerState w;
    OptimizerState bias;
    OptimizerState gamma;
    OptimizerState beta;
};

// Everything that evolves during training.
struct TrainState {
    Network net;
    std::vector<ParamState> optim;
    std::vector<std::vector<double>> curvature;  // d from the latest update, per layer
    std::vector<LayerQuantization> quant;        // cache used by the latest forward pass
    std::uint64_t step = 0;
};

struct MetricsRow {
    std::size_t epoch = 0;
    std::string split;
    double loss = 0.0;
    double error_rate = 0.0;
    std::vector<std::optional<double>> alpha;  // per layer; empty for unscaled methods
    double wall_seconds = 0.0;
};

struct StepRecord {
    std::uint64_t step = 0;
    std::size_t epoch = 0;
    std::size_t layer = 0;
    std::optional<double> alpha;
    std::optional<double> beta;
    int iterations = 0;
    bool converged = true;
    bool degenerate = false;
};

struct TrainResult {
    TrainState state;
    std::vector<LayerQuantization> final_quant;
    std::vector<MetricsRow> metrics;
    std::vector<StepRecord> trajectory;
    std::vector<double> epoch_seconds;
    std::size_t degenerate_events = 0;
};

using EpochCallback = std::function<void(std::size_t epoch, const TrainState&, std::span<const MetricsRow>)>;

TrainState init_state(const TrainConfig& config, std::size_t inputs, std::size_t classes);

// Quantizes every layer from the state's weights, curvature and codes.
std::vector<LayerQuantization> quantize_network(const TrainConfig& config, const TrainState& state);

struct Evaluation {
    double loss = 0.0;
    double error_rate = 0.0;
};

Evaluation evaluate(const TrainConfig& config, TrainState& state, std::span<const LayerQuantization> quant,
                    const Dataset& data);

TrainResult train(const TrainConfig& config, const DataSplits& data, const EpochCallback& on_epoch = {});

}  // namespace lawq::nn
