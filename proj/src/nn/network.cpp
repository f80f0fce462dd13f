#include <string>

#include "lawq/error.hpp"
#include "lawq/nn/network.hpp"

namespace lawq::nn {

std::vector<LayerSpec> mlp(std::size_t inputs, std::span<const std::size_t> hidden, std::size_t classes,
                           bool batch_norm) {
    std::vector<LayerSpec> specs;
    std::size_t fan_in = inputs;
    for (std::size_t width : hidden) {
        specs.push_back({fan_in, width, batch_norm, Activation::Relu});
        fan_in = width;
    }
    specs.push_back({fan_in, classes, batch_norm, Activation::None});
    return specs;
}

EffectiveWeights effective_weights(const LayerQuantization& q, std::size_t rows, std::size_t cols) {
    if (q.w_hat.size() != rows * cols) fail(ErrorCode::ShapeMismatch, "quantized layer size does not match shape");
    const auto r = static_cast<Eigen::Index>(rows);
    const auto c = static_cast<Eigen::Index>(cols);
    EffectiveWeights out;
    if (q.layer && !q.layer->two_scale()) {
        const QuantizedLayer& layer = *q.layer;
        out.values.resize(r, c);
        double* v = out.values.data();
        for (std::size_t i = 0; i < layer.codes.size(); ++i) v[i] = layer.qset.value(layer.codes[i]);
        out.input_scale = layer.alpha;
    } else {
        out.values = Eigen::Map<const Matrix>(q.w_hat.data(), r, c);
    }
    return out;
}

EffectiveWeights dense_weights(const Matrix& w) { return {w, 1.0}; }

Network Network::init(std::span<const LayerSpec> specs, Rng& rng, double init_range) {
    if (specs.empty()) fail(ErrorCode::InvalidArgument, "network needs at least one layer");
    Network net;
    for (std::size_t l = 0; l < specs.size(); ++l) {
        const LayerSpec& s = specs[l];
        if (s.fan_in < 1 || s.fan_out < 1) fail(ErrorCode::InvalidArgument, "layer widths must be positive");
        if (l > 0 && specs[l - 1].fan_out != s.fan_in) {
            fail(ErrorCode::ShapeMismatch, "layer " + std::to_string(l) + " fan_in does not match previous fan_out");
        }
        Layer layer;
        layer.spec = s;
        layer.w.resize(static_cast<Eigen::Index>(s.fan_out), static_cast<Eigen::Index>(s.fan_in));
        for (Eigen::Index i = 0; i < layer.w.size(); ++i) layer.w.data()[i] = rng.uniform(-init_range, init_range);
        if (s.has_batch_norm) {
            layer.bn = BatchNormParams::identity(s.fan_out);
        } else {
            layer.bias = Vector::Zero(static_cast<Eigen::Index>(s.fan_out));
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

ForwardResult forward(Network& net, std::span<const EffectiveWeights> weights, const Matrix& x, bool training) {
    if (weights.size() != net.layers.size()) fail(ErrorCode::ShapeMismatch, "one weight matrix per layer expected");
    if (static_cast<std::size_t>(x.cols()) != net.inputs()) {
        fail(ErrorCode::ShapeMismatch, "input has " + std::to_string(x.cols()) + " features, network expects " +
                                           std::to_string(net.inputs()));
    }
    ForwardResult out;
    out.layers.resize(net.layers.size());
    Matrix a = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Layer& layer = net.layers[l];
        const EffectiveWeights& eff = weights[l];
        if (eff.values.rows() != layer.w.rows() || eff.values.cols() != layer.w.cols()) {
            fail(ErrorCode::ShapeMismatch, "effective weights of layer " + std::to_string(l) + " have wrong shape");
        }
        LayerCache& cache = out.layers[l];
        cache.input = std::move(a);
        Matrix z = eff.input_scale == 1.0 ? Matrix(cache.input * eff.values.transpose())
                                          : Matrix((eff.input_scale * cache.input) * eff.values.transpose());
        if (layer.spec.has_batch_norm) {
            z = batch_norm_forward(z, layer.bn, training, &cache.bn);
        } else {
            z.rowwise() += layer.bias.transpose();
        }
        cache.pre_activation = z;
        a = layer.spec.activation == Activation::Relu ? Matrix(z.cwiseMax(0.0)) : std::move(z);
    }
    out.scores = std::move(a);
    return out;
}

std::vector<LayerGrads> backward(const Network& net, std::span<const EffectiveWeights> weights,
                                 const ForwardResult& fwd, const Matrix& score_grad) {
    if (score_grad.rows() != fwd.scores.rows() || score_grad.cols() != fwd.scores.cols()) {
        fail(ErrorCode::ShapeMismatch, "score gradient shape does not match scores");
    }
    std::vector<LayerGrads> grads(net.layers.size());
    Matrix da = score_grad;
    for (std::size_t l = net.layers.size(); l-- > 0;) {
        const Layer& layer = net.layers[l];
        const LayerCache& cache = fwd.layers[l];
        Matrix dz = layer.spec.activation == Activation::Relu
                        ? Matrix(da.array() * (cache.pre_activation.array() > 0.0).cast<double>())
                        : std::move(da);
        LayerGrads& g = grads[l];
        if (layer.spec.has_batch_norm) {
            BatchNormGrads bg = batch_norm_backward(dz, layer.bn, cache.bn);
            dz = std::move(bg.dx);
            g.gamma = std::move(bg.dgamma);
            g.beta = std::move(bg.dbeta);
        } else {
            g.bias = dz.colwise().sum().transpose();
        }
        g.w_hat = dz.transpose() * cache.input;
        if (l > 0) {
            const EffectiveWeights& eff = weights[l];
            da = eff.input_scale == 1.0 ? Matrix(dz * eff.values) : Matrix(eff.input_scale * (dz * eff.values));
        }
    }
    return grads;
}

}  // namespace lawq::nn
