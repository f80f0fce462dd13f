#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lawq/qset.hpp"

namespace lawq::io {

inline constexpr std::uint32_t kBlobVersion = 1;

enum class BlobKind : std::uint32_t {
    FullPrecision = 0,
    QuantizedOneScale = 1,
    QuantizedTwoScale = 2,
    OptimizerState = 3,
};

std::string_view to_string(BlobKind kind) noexcept;

// One named tensor.  Which fields are populated depends on the blob kind:
//   full_precision      values (product(dims) doubles)
//   quantized_one_scale scales {alpha}, qset, codes
//   quantized_two_scale scales {alpha, beta}, codes in {-1, 0, 1}
//   optimizer_state     scales {t}, values = m followed by v
struct BlobRecord {
    std::string name;
    std::vector<std::uint64_t> dims;
    std::vector<double> scales;
    QuantKind qkind = QuantKind::Ternary;
    std::uint8_t bits = 2;
    std::vector<std::int8_t> codes;
    std::vector<double> values;

    std::uint64_t element_count() const noexcept;
    bool operator==(const BlobRecord&) const = default;
};

struct WeightBlob {
    BlobKind kind = BlobKind::FullPrecision;
    std::vector<BlobRecord> records;

    const BlobRecord* find(std::string_view name) const noexcept;
    std::vector<std::string> names() const;
    bool operator==(const WeightBlob&) const = default;
};

// Little-endian layout:
//   "LAWQ" u32 version u32 kind u32 record_count, then per record
//   u32 name_len, name, u32 rank, u64 dims[rank], u32 scale_count,
//   f64 scales[], u8 qkind, u8 bits, u64 code_count, i8 codes[],
//   u64 value_count, f64 values[].
std::vector<std::uint8_t> write_blob(const WeightBlob& blob);
WeightBlob read_blob(std::span<const std::uint8_t> bytes);

// Checks the per-kind field rules above; read_blob applies it too.
void validate_blob(const WeightBlob& blob);

}  // namespace lawq::io
