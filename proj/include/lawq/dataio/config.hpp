#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "lawq/nn/train.hpp"

namespace lawq::io {

struct DataConfig {
    enum class Source { Idx, Synthetic, Separable2d };
    Source source = Source::Idx;
    std::filesystem::path train_images;
    std::filesystem::path train_labels;
    std::filesystem::path test_images;
    std::filesystem::path test_labels;
    double val_fraction = 0.1;
    std::uint64_t split_seed = 0;
    std::size_t train_limit = 0;  // 0 keeps everything
    std::size_t test_limit = 0;
    std::size_t synthetic_train = 1000;
    std::size_t synthetic_test = 200;
    std::size_t synthetic_features = 16;
    std::size_t synthetic_classes = 4;
};

struct RunConfig {
    nn::TrainConfig train;
    DataConfig data;
};

// INI text with sections [train], [quantizer], [schedule], [data]; '#'
// starts a comment.  Relative data paths resolve against base_dir.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

nn::DataSplits load_data(const DataConfig& config);

}  // namespace lawq::io
