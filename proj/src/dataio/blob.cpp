#include "lawq/dataio/blob.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "lawq/error.hpp"

namespace lawq::io {

namespace {

constexpr char kMagic[4] = {'L', 'A', 'W', 'Q'};

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

// Every read is bounds-checked; running off the end means the blob was cut short.
class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    void need(std::uint64_t n) const {
        if (n > data_.size() - pos_) fail(ErrorCode::CorruptRecord, "blob ends inside a record");
    }
    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void bytes(void* p, std::size_t n) {
        need(n);
        std::memcpy(p, data_.data() + pos_, n);
        pos_ += n;
    }
    // Guards a count before allocating `count * width` bytes.
    std::size_t count(std::uint64_t n, std::size_t width) const {
        if (n > (data_.size() - pos_) / width) fail(ErrorCode::CorruptRecord, "record length exceeds blob size");
        return static_cast<std::size_t>(n);
    }
    bool done() const { return pos_ == data_.size(); }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

void corrupt(const BlobRecord& r, const std::string& what) {
    fail(ErrorCode::CorruptRecord, "record '" + r.name + "': " + what);
}

}  // namespace

std::string_view to_string(BlobKind kind) noexcept {
    switch (kind) {
        case BlobKind::FullPrecision: return "full_precision";
        case BlobKind::QuantizedOneScale: return "quantized_one_scale";
        case BlobKind::QuantizedTwoScale: return "quantized_two_scale";
        case BlobKind::OptimizerState: return "optimizer_state";
    }
    return "?";
}

std::uint64_t BlobRecord::element_count() const noexcept {
    std::uint64_t n = 1;
    for (std::uint64_t d : dims) n *= d;
    return n;
}

const BlobRecord* WeightBlob::find(std::string_view name) const noexcept {
    for (const BlobRecord& r : records) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

std::vector<std::string> WeightBlob::names() const {
    std::vector<std::string> out;
    for (const BlobRecord& r : records) out.push_back(r.name);
    return out;
}

void validate_blob(const WeightBlob& blob) {
    for (const BlobRecord& r : blob.records) {
        if (r.name.empty()) corrupt(r, "empty name");
        const std::uint64_t n = r.element_count();
        switch (blob.kind) {
            case BlobKind::FullPrecision:
                if (r.values.size() != n) corrupt(r, "value count does not match dims");
                if (!r.codes.empty() || !r.scales.empty()) corrupt(r, "full-precision record carries codes or scales");
                break;
            case BlobKind::QuantizedOneScale: {
                if (r.scales.size() != 1) corrupt(r, "one-scale record needs exactly one scale");
                if (r.codes.size() != n) corrupt(r, "code count does not match dims");
                if (r.qkind != QuantKind::Ternary && r.qkind != QuantKind::Linear && r.qkind != QuantKind::Log) {
                    corrupt(r, "unknown quantization kind");
                }
                if (r.bits < 2 || r.bits > QuantSet::kMaxBits || (r.qkind == QuantKind::Ternary) != (r.bits == 2)) {
                    corrupt(r, "invalid bit width for the quantization kind");
                }
                const int k = (1 << (r.bits - 1)) - 1;
                for (std::int8_t c : r.codes) {
                    if (c < -k || c > k) corrupt(r, "code outside the quantized-value set");
                }
                break;
            }
            case BlobKind::QuantizedTwoScale:
                if (r.scales.size() != 2) corrupt(r, "two-scale record needs alpha and beta");
                if (r.codes.size() != n) corrupt(r, "code count does not match dims");
                for (std::int8_t c : r.codes) {
                    if (c < -1 || c > 1) corrupt(r, "two-scale codes must lie in {-1, 0, 1}");
                }
                break;
            case BlobKind::OptimizerState:
                if (r.scales.size() != 1) corrupt(r, "optimizer record needs the step counter");
                if (r.values.size() != 2 * n) corrupt(r, "optimizer record needs m and v");
                break;
            default:
                fail(ErrorCode::CorruptRecord, "unknown blob kind");
        }
    }
}

std::vector<std::uint8_t> write_blob(const WeightBlob& blob) {
    validate_blob(blob);
    Writer w;
    w.bytes(kMagic, 4);
    w.u32(kBlobVersion);
    w.u32(static_cast<std::uint32_t>(blob.kind));
    w.u32(static_cast<std::uint32_t>(blob.records.size()));
    for (const BlobRecord& r : blob.records) {
        w.u32(static_cast<std::uint32_t>(r.name.size()));
        w.bytes(r.name.data(), r.name.size());
        w.u32(static_cast<std::uint32_t>(r.dims.size()));
        for (std::uint64_t d : r.dims) w.u64(d);
        w.u32(static_cast<std::uint32_t>(r.scales.size()));
        for (double s : r.scales) w.f64(s);
        w.u8(static_cast<std::uint8_t>(r.qkind));
        w.u8(r.bits);
        w.u64(r.codes.size());
        w.bytes(r.codes.data(), r.codes.size());
        w.u64(r.values.size());
        for (double v : r.values) w.f64(v);
    }
    return w.take();
}

WeightBlob read_blob(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        fail(ErrorCode::BadMagic, "not a LAWQ blob");
    }
    Reader r(bytes.subspan(4));
    const std::uint32_t version = r.u32();
    if (version != kBlobVersion) {
        fail(ErrorCode::VersionMismatch, "blob version " + std::to_string(version) + ", expected " +
                                             std::to_string(kBlobVersion));
    }
    WeightBlob blob;
    const std::uint32_t kind = r.u32();
    if (kind > static_cast<std::uint32_t>(BlobKind::OptimizerState)) {
        fail(ErrorCode::CorruptRecord, "unknown blob kind " + std::to_string(kind));
    }
    blob.kind = static_cast<BlobKind>(kind);
    const std::size_t records = r.count(r.u32(), 1);
    for (std::size_t i = 0; i < records; ++i) {
        BlobRecord rec;
        rec.name.resize(r.count(r.u32(), 1));
        r.bytes(rec.name.data(), rec.name.size());
        rec.dims.resize(r.count(r.u32(), 8));
        for (std::uint64_t& d : rec.dims) d = r.u64();
        rec.scales.resize(r.count(r.u32(), 8));
        for (double& s : rec.scales) s = r.f64();
        rec.qkind = static_cast<QuantKind>(r.u8());
        rec.bits = r.u8();
        rec.codes.resize(r.count(r.u64(), 1));
        r.bytes(rec.codes.data(), rec.codes.size());
        rec.values.resize(r.count(r.u64(), 8));
        for (double& v : rec.values) v = r.f64();
        blob.records.push_back(std::move(rec));
    }
    if (!r.done()) fail(ErrorCode::CorruptRecord, "trailing bytes after the last record");
    validate_blob(blob);
    return blob;
}

}  // namespace lawq::io
