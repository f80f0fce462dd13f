#include "lawq/dataio/checkpoint.hpp"

#include "lawq/error.hpp"

namespace lawq::io {

namespace {

BlobRecord vector_record(std::string name, const nn::Vector& v) {
    BlobRecord r;
    r.name = std::move(name);
    r.dims = {static_cast<std::uint64_t>(v.size())};
    r.values.assign(v.data(), v.data() + v.size());
    return r;
}

BlobRecord matrix_record(std::string name, const nn::Matrix& m) {
    BlobRecord r;
    r.name = std::move(name);
    r.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    r.values.assign(m.data(), m.data() + m.size());
    return r;
}

std::vector<std::uint64_t> layer_dims(const nn::Layer& layer) {
    return {static_cast<std::uint64_t>(layer.w.rows()), static_cast<std::uint64_t>(layer.w.cols())};
}

BlobRecord optimizer_record(std::string name, const OptimizerState& s, std::vector<std::uint64_t> dims) {
    BlobRecord r;
    r.name = std::move(name);
    r.dims = std::move(dims);
    r.scales = {static_cast<double>(s.t)};
    r.values = s.m;
    r.values.insert(r.values.end(), s.v.begin(), s.v.end());
    return r;
}

const BlobRecord& require(const WeightBlob& blob, const std::string& name) {
    const BlobRecord* r = blob.find(name);
    if (!r) fail(ErrorCode::CorruptRecord, "blob has no record '" + name + "'");
    return *r;
}

nn::Vector vector_from(const BlobRecord& r, std::size_t expected) {
    if (r.dims.size() != 1 || r.dims[0] != expected) {
        fail(ErrorCode::ShapeMismatch, "record '" + r.name + "' has the wrong length");
    }
    return Eigen::Map<const nn::Vector>(r.values.data(), static_cast<Eigen::Index>(r.values.size()));
}

}  // namespace

std::string layer_name(std::size_t layer) { return "fc" + std::to_string(layer + 1); }

WeightBlob weights_blob(const nn::Network& net) {
    WeightBlob blob;
    blob.kind = BlobKind::FullPrecision;
    for (std::size_t l = 0; l < net.layers.size(); ++l) blob.records.push_back(matrix_record(layer_name(l), net.layers[l].w));
    return blob;
}

WeightBlob params_blob(const nn::Network& net) {
    WeightBlob blob;
    blob.kind = BlobKind::FullPrecision;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const nn::Layer& layer = net.layers[l];
        const std::string base = layer_name(l);
        if (layer.spec.has_batch_norm) {
            blob.records.push_back(vector_record(base + ".gamma", layer.bn.gamma));
            blob.records.push_back(vector_record(base + ".beta", layer.bn.beta));
            blob.records.push_back(vector_record(base + ".running_mean", layer.bn.running_mean));
            blob.records.push_back(vector_record(base + ".running_var", layer.bn.running_var));
        } else {
            blob.records.push_back(vector_record(base + ".bias", layer.bias));
        }
    }
    return blob;
}

WeightBlob curvature_blob(const nn::TrainState& state) {
    WeightBlob blob;
    blob.kind = BlobKind::FullPrecision;
    for (std::size_t l = 0; l < state.net.layers.size(); ++l) {
        BlobRecord r;
        r.name = layer_name(l);
        r.dims = layer_dims(state.net.layers[l]);
        r.values = state.curvature[l];
        blob.records.push_back(std::move(r));
    }
    return blob;
}

WeightBlob optimizer_blob(const nn::TrainState& state) {
    WeightBlob blob;
    blob.kind = BlobKind::OptimizerState;
    for (std::size_t l = 0; l < state.net.layers.size(); ++l) {
        const nn::Layer& layer = state.net.layers[l];
        const nn::ParamState& p = state.optim[l];
        const std::string base = layer_name(l);
        blob.records.push_back(optimizer_record(base, p.w, layer_dims(layer)));
        if (layer.spec.has_batch_norm) {
            blob.records.push_back(optimizer_record(base + ".gamma", p.gamma, {p.gamma.m.size()}));
            blob.records.push_back(optimizer_record(base + ".beta", p.beta, {p.beta.m.size()}));
        } else {
            blob.records.push_back(optimizer_record(base + ".bias", p.bias, {p.bias.m.size()}));
        }
    }
    return blob;
}

BlobRecord record_from_layer(std::string name, std::vector<std::uint64_t> dims, const QuantizedLayer& layer) {
    BlobRecord r;
    r.name = std::move(name);
    r.dims = std::move(dims);
    r.codes = layer.codes;
    if (layer.two_scale()) {
        r.scales = {layer.alpha, *layer.beta};
    } else {
        r.scales = {layer.alpha};
        r.qkind = layer.qset.kind();
        r.bits = static_cast<std::uint8_t>(layer.qset.bits());
    }
    return r;
}

QuantizedLayer layer_from_record(const BlobRecord& record, BlobKind kind) {
    QuantizedLayer layer;
    layer.codes = record.codes;
    switch (kind) {
        case BlobKind::QuantizedOneScale:
            if (record.scales.size() != 1) fail(ErrorCode::CorruptRecord, "one-scale record needs one scale");
            layer.alpha = record.scales[0];
            layer.qset = record.qkind == QuantKind::Ternary
                             ? QuantSet::ternary()
                             : QuantSet::build(record.bits, record.qkind == QuantKind::Log ? Scheme::Log : Scheme::Linear);
            break;
        case BlobKind::QuantizedTwoScale:
            if (record.scales.size() != 2) fail(ErrorCode::CorruptRecord, "two-scale record needs two scales");
            layer.alpha = record.scales[0];
            layer.beta = record.scales[1];
            break;
        default:
            fail(ErrorCode::InvalidArgument, "record '" + record.name + "' is not quantized");
    }
    return layer;
}

WeightBlob quantized_blob(const nn::Network& net, std::span<const LayerQuantization> quant) {
    if (quant.size() != net.layers.size()) fail(ErrorCode::LengthMismatch, "one quantization per layer expected");
    WeightBlob blob;
    bool any_codes = false;
    bool two_scale = false;
    for (const LayerQuantization& q : quant) {
        if (q.layer) {
            any_codes = true;
            two_scale = q.layer->two_scale();
        }
    }
    if (!any_codes) {
        blob.kind = BlobKind::FullPrecision;
        for (std::size_t l = 0; l < quant.size(); ++l) {
            BlobRecord r;
            r.name = layer_name(l);
            r.dims = layer_dims(net.layers[l]);
            r.values = quant[l].w_hat;
            blob.records.push_back(std::move(r));
        }
        return blob;
    }
    blob.kind = two_scale ? BlobKind::QuantizedTwoScale : BlobKind::QuantizedOneScale;
    for (std::size_t l = 0; l < quant.size(); ++l) {
        if (!quant[l].layer) fail(ErrorCode::InvalidArgument, "layer " + layer_name(l) + " has no codes");
        blob.records.push_back(record_from_layer(layer_name(l), layer_dims(net.layers[l]), *quant[l].layer));
    }
    return blob;
}

nn::Network network_from_blobs(const WeightBlob& weights, const WeightBlob& params) {
    if (weights.kind != BlobKind::FullPrecision || params.kind != BlobKind::FullPrecision) {
        fail(ErrorCode::InvalidArgument, "weights and params must be full-precision blobs");
    }
    nn::Network net;
    for (std::size_t l = 0;; ++l) {
        const std::string base = layer_name(l);
        const BlobRecord* w = weights.find(base);
        if (!w) break;
        if (w->dims.size() != 2) fail(ErrorCode::ShapeMismatch, "weight record '" + base + "' is not a matrix");
        nn::Layer layer;
        layer.spec.fan_out = static_cast<std::size_t>(w->dims[0]);
        layer.spec.fan_in = static_cast<std::size_t>(w->dims[1]);
        if (!net.layers.empty() && net.layers.back().spec.fan_out != layer.spec.fan_in) {
            fail(ErrorCode::ShapeMismatch, "layer '" + base + "' does not chain with the previous layer");
        }
        layer.w = Eigen::Map<const nn::Matrix>(w->values.data(), static_cast<Eigen::Index>(w->dims[0]),
                                               static_cast<Eigen::Index>(w->dims[1]));
        layer.spec.has_batch_norm = params.find(base + ".gamma") != nullptr;
        const std::size_t out = layer.spec.fan_out;
        if (layer.spec.has_batch_norm) {
            layer.bn.gamma = vector_from(require(params, base + ".gamma"), out);
            layer.bn.beta = vector_from(require(params, base + ".beta"), out);
            layer.bn.running_mean = vector_from(require(params, base + ".running_mean"), out);
            layer.bn.running_var = vector_from(require(params, base + ".running_var"), out);
        } else {
            layer.bias = vector_from(require(params, base + ".bias"), out);
        }
        net.layers.push_back(std::move(layer));
    }
    if (net.layers.empty()) fail(ErrorCode::CorruptRecord, "weights blob has no layer fc1");
    if (net.layers.size() != weights.records.size()) {
        fail(ErrorCode::CorruptRecord, "weights blob has records that are not consecutive layers");
    }
    for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) net.layers[l].spec.activation = nn::Activation::Relu;
    net.layers.back().spec.activation = nn::Activation::None;
    return net;
}

}  // namespace lawq::io
