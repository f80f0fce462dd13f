#pragma once

#include <span>

#include "lawq/dataio/blob.hpp"
#include "lawq/nn/train.hpp"

namespace lawq::io {

// Layer l (zero-based) is stored under "fc<l+1>".
std::string layer_name(std::size_t layer);

WeightBlob weights_blob(const nn::Network& net);
// Biases and batch-norm parameters / running statistics.
WeightBlob params_blob(const nn::Network& net);
WeightBlob curvature_blob(const nn::TrainState& state);
WeightBlob optimizer_blob(const nn::TrainState& state);

// Quantized layers as a one- or two-scale blob; methods without integer
// codes (full precision, DoReFa) are stored as full-precision w_hat.
WeightBlob quantized_blob(const nn::Network& net, std::span<const LayerQuantization> quant);

// Rebuilds the network from weights and params blobs; shapes come from the
// records, activations follow the mlp() convention.
nn::Network network_from_blobs(const WeightBlob& weights, const WeightBlob& params);

QuantizedLayer layer_from_record(const BlobRecord& record, BlobKind kind);
BlobRecord record_from_layer(std::string name, std::vector<std::uint64_t> dims, const QuantizedLayer& layer);

}  // namespace lawq::io
