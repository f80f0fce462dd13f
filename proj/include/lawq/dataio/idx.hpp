#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lawq/nn/train.hpp"

namespace lawq::io {

enum class IdxDtype : std::uint8_t { U8 = 0x08, F32 = 0x0D };

struct IdxTensor {
    IdxDtype dtype = IdxDtype::U8;
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> u8;
    std::vector<float> f32;

    std::size_t count() const noexcept;
};

IdxTensor parse_idx(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor);

// Plain or gzip-compressed IDX file.
IdxTensor read_idx(const std::filesystem::path& path);

// Images (n x ...) scaled to [0, 1] for u8 input, labels (n).  `limit`
// keeps the first `limit` samples when nonzero.
nn::Dataset dataset_from_idx(const IdxTensor& images, const IdxTensor& labels, std::size_t limit = 0);

}  // namespace lawq::io
