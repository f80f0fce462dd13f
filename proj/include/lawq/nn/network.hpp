#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lawq/methods.hpp"
#include "lawq/rng.hpp"

namespace lawq::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Activation { Relu, None };

struct LayerSpec {
    std::size_t fan_in = 1;
    std::size_t fan_out = 1;
    bool has_batch_norm = true;
    Activation activation = Activation::Relu;
};

// inputs -> hidden... -> classes; the output layer has no activation.
std::vector<LayerSpec> mlp(std::size_t inputs, std::span<const std::size_t> hidden, std::size_t classes,
                           bool batch_norm);

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

struct BatchNormParams {
    Vector gamma;
    Vector beta;
    Vector running_mean;
    Vector running_var;

    static BatchNormParams identity(std::size_t features);
};

struct BatchNormCache {
    Matrix x_hat;
    Vector inv_std;
};

// Training mode normalizes with batch statistics (biased variance) and folds
// them into the running estimates; eval mode uses the running estimates as is.
Matrix batch_norm_forward(const Matrix& x, BatchNormParams& params, bool training, BatchNormCache* cache);

struct BatchNormGrads {
    Matrix dx;
    Vector dgamma;
    Vector dbeta;
};

BatchNormGrads batch_norm_backward(const Matrix& dy, const BatchNormParams& params, const BatchNormCache& cache);

enum class LossKind { SquareHinge, SoftmaxCrossEntropy };

struct LossResult {
    double loss = 0.0;
    Matrix grad;
    std::size_t errors = 0;  // argmax(scores) != label
};

LossResult square_hinge_loss(const Matrix& scores, std::span<const int> labels);
LossResult softmax_cross_entropy(const Matrix& scores, std::span<const int> labels);
LossResult compute_loss(LossKind kind, const Matrix& scores, std::span<const int> labels);

// What a layer multiplies its input by.  For one-scale quantization `values`
// holds the elements of Q and the input is rescaled by alpha first;
// otherwise `values` is the dense reconstruction and input_scale is 1.
struct EffectiveWeights {
    Matrix values;
    double input_scale = 1.0;
};

EffectiveWeights effective_weights(const LayerQuantization& q, std::size_t rows, std::size_t cols);
EffectiveWeights dense_weights(const Matrix& w);

struct Layer {
    LayerSpec spec;
    Matrix w;              // full-precision shadow weights, fan_out x fan_in
    Vector bias;           // only without batch norm
    BatchNormParams bn;    // only with batch norm
};

struct Network {
    std::vector<Layer> layers;

    // Weights uniform in [-range, range]; biases zero; batch norm identity.
    static Network init(std::span<const LayerSpec> specs, Rng& rng, double init_range);

    std::size_t inputs() const noexcept { return layers.front().spec.fan_in; }
    std::size_t outputs() const noexcept { return layers.back().spec.fan_out; }
};

struct LayerCache {
    Matrix input;
    Matrix pre_activation;  // after batch norm / bias
    BatchNormCache bn;
};

struct ForwardResult {
    Matrix scores;
    std::vector<LayerCache> layers;
};

ForwardResult forward(Network& net, std::span<const EffectiveWeights> weights, const Matrix& x, bool training);

struct LayerGrads {
    Matrix w_hat;  // gradient with respect to the effective (quantized) weights
    Vector bias;
    Vector gamma;
    Vector beta;
};

std::vector<LayerGrads> backward(const Network& net, std::span<const EffectiveWeights> weights,
                                 const ForwardResult& fwd, const Matrix& score_grad);

}  // namespace lawq::nn
