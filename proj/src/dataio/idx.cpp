#include "lawq/dataio/idx.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#include "lawq/dataio/files.hpp"
#include "lawq/error.hpp"

namespace lawq::io {

namespace {

std::uint32_t read_be32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) << 24 | static_cast<std::uint32_t>(p[1]) << 16 |
           static_cast<std::uint32_t>(p[2]) << 8 | static_cast<std::uint32_t>(p[3]);
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::size_t element_size(IdxDtype dtype) { return dtype == IdxDtype::U8 ? 1 : 4; }

}  // namespace

std::size_t IdxTensor::count() const noexcept {
    std::size_t n = 1;
    for (std::uint32_t d : dims) n *= d;
    return n;
}

IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) fail(ErrorCode::TruncatedPayload, "IDX header shorter than 4 bytes");
    if (bytes[0] != 0 || bytes[1] != 0) fail(ErrorCode::BadMagic, "IDX magic must start with two zero bytes");
    IdxTensor t;
    if (bytes[2] == 0x08) {
        t.dtype = IdxDtype::U8;
    } else if (bytes[2] == 0x0D) {
        t.dtype = IdxDtype::F32;
    } else {
        fail(ErrorCode::UnsupportedDtype, "IDX dtype byte " + std::to_string(bytes[2]) + " is not supported");
    }
    const std::size_t rank = bytes[3];
    if (rank == 0) fail(ErrorCode::BadMagic, "IDX rank must be at least 1");
    const std::size_t header = 4 + 4 * rank;
    if (bytes.size() < header) fail(ErrorCode::TruncatedPayload, "IDX header truncated");
    std::size_t count = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        const std::uint32_t d = read_be32(bytes.data() + 4 + 4 * i);
        t.dims.push_back(d);
        count *= d;
    }
    const std::size_t payload = count * element_size(t.dtype);
    if (bytes.size() - header != payload) {
        fail(ErrorCode::TruncatedPayload, "IDX payload has " + std::to_string(bytes.size() - header) +
                                              " bytes, dims require " + std::to_string(payload));
    }
    const std::uint8_t* p = bytes.data() + header;
    if (t.dtype == IdxDtype::U8) {
        t.u8.assign(p, p + count);
    } else {
        t.f32.resize(count);
        for (std::size_t i = 0; i < count; ++i) t.f32[i] = std::bit_cast<float>(read_be32(p + 4 * i));
    }
    return t;
}

std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor) {
    std::vector<std::uint8_t> out{0, 0, static_cast<std::uint8_t>(tensor.dtype),
                                  static_cast<std::uint8_t>(tensor.dims.size())};
    for (std::uint32_t d : tensor.dims) put_be32(out, d);
    if (tensor.dtype == IdxDtype::U8) {
        out.insert(out.end(), tensor.u8.begin(), tensor.u8.end());
    } else {
        for (float f : tensor.f32) put_be32(out, std::bit_cast<std::uint32_t>(f));
    }
    return out;
}

IdxTensor read_idx(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = maybe_gunzip(read_file(path));
    try {
        return parse_idx(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

nn::Dataset dataset_from_idx(const IdxTensor& images, const IdxTensor& labels, std::size_t limit) {
    if (labels.dims.size() != 1) fail(ErrorCode::ShapeMismatch, "label file must have rank 1");
    if (labels.dtype != IdxDtype::U8) fail(ErrorCode::UnsupportedDtype, "labels must be unsigned bytes");
    const std::size_t n = labels.dims[0];
    if (images.dims.empty() || images.dims[0] != n) {
        fail(ErrorCode::ShapeMismatch, "image and label files disagree on the sample count");
    }
    const std::size_t features = n == 0 ? 0 : images.count() / n;
    const std::size_t keep = limit ? std::min(limit, n) : n;
    nn::Dataset out;
    out.x.resize(static_cast<Eigen::Index>(keep), static_cast<Eigen::Index>(features));
    out.y.resize(keep);
    int top = -1;
    for (std::size_t i = 0; i < keep; ++i) {
        for (std::size_t f = 0; f < features; ++f) {
            const std::size_t k = i * features + f;
            out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) =
                images.dtype == IdxDtype::U8 ? images.u8[k] / 255.0 : static_cast<double>(images.f32[k]);
        }
        out.y[i] = labels.u8[i];
        top = std::max(top, out.y[i]);
    }
    out.classes = static_cast<std::size_t>(top + 1);
    return out;
}

}  // namespace lawq::io
