#include <gtest/gtest.h>

#include <zlib.h>

#include <algorithm>
#include <clocale>
#include <cstring>
#include <functional>
#include <vector>

#include "lawq/dataio/blob.hpp"
#include "lawq/dataio/checkpoint.hpp"
#include "lawq/dataio/config.hpp"
#include "lawq/dataio/files.hpp"
#include "lawq/dataio/idx.hpp"
#include "lawq/dataio/report.hpp"
#include "lawq/error.hpp"
#include "temp_dir.hpp"

namespace lawq::io {
namespace {

using Bytes = std::vector<std::uint8_t>;

void expect_error(ErrorCode code, const std::function<void()>& fn) {
    try {
        fn();
        ADD_FAILURE() << "expected " << to_string(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

Bytes idx_header(std::uint8_t pad1, std::uint8_t dtype, std::initializer_list<std::uint32_t> dims) {
    Bytes b{0, pad1, dtype, static_cast<std::uint8_t>(dims.size())};
    for (std::uint32_t d : dims) {
        for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(d >> s));
    }
    return b;
}

TEST(Idx, Images) {
    Bytes b = idx_header(0, 0x08, {10, 28, 28});
    for (int i = 0; i < 7840; ++i) b.push_back(static_cast<std::uint8_t>(i % 251));
    const IdxTensor t = parse_idx(b);
    EXPECT_EQ(t.dims, (std::vector<std::uint32_t>{10, 28, 28}));
    EXPECT_EQ(t.count(), 7840u);
    EXPECT_EQ(t.u8[300], 300 % 251);
}

TEST(Idx, Labels) {
    Bytes b = idx_header(0, 0x08, {10});
    for (int i = 0; i < 10; ++i) b.push_back(static_cast<std::uint8_t>(i));
    const IdxTensor t = parse_idx(b);
    EXPECT_EQ(t.dims, std::vector<std::uint32_t>{10});
    EXPECT_EQ(t.u8[9], 9);
}

TEST(Idx, Errors) {
    expect_error(ErrorCode::BadMagic, [] { parse_idx(idx_header(1, 0x08, {1})); });
    expect_error(ErrorCode::UnsupportedDtype, [] {
        Bytes b = idx_header(0, 0x0B, {1});
        b.push_back(0);
        b.push_back(0);
        parse_idx(b);
    });
    expect_error(ErrorCode::TruncatedPayload, [] {
        Bytes b = idx_header(0, 0x08, {10});
        b.resize(b.size() + 9);
        parse_idx(b);
    });
    expect_error(ErrorCode::TruncatedPayload, [] { parse_idx(Bytes{0, 0, 8, 2, 0, 0}); });
}

TEST(Idx, FloatRoundTripAndGzip) {
    IdxTensor t;
    t.dtype = IdxDtype::F32;
    t.dims = {2, 3};
    t.f32 = {0.5f, -1.25f, 3.0f, 1e-7f, 0.0f, -0.0f};
    const Bytes enc = encode_idx(t);
    const IdxTensor back = parse_idx(enc);
    EXPECT_EQ(back.dims, t.dims);
    EXPECT_EQ(back.f32, t.f32);

    TempDir dir;
    uLongf size = compressBound(enc.size()) + 32;
    // gzip wrapper via deflateInit2 with windowBits 16 + 15.
    Bytes gz(size);
    z_stream zs{};
    ASSERT_EQ(deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 16 + MAX_WBITS, 8, Z_DEFAULT_STRATEGY), Z_OK);
    zs.next_in = const_cast<Bytef*>(enc.data());
    zs.avail_in = static_cast<uInt>(enc.size());
    zs.next_out = gz.data();
    zs.avail_out = static_cast<uInt>(gz.size());
    ASSERT_EQ(deflate(&zs, Z_FINISH), Z_STREAM_END);
    gz.resize(zs.total_out);
    deflateEnd(&zs);
    write_file_atomic(dir / "t.idx.gz", gz);
    EXPECT_EQ(read_idx(dir / "t.idx.gz").f32, t.f32);
    Bytes cut(gz.begin(), gz.begin() + static_cast<std::ptrdiff_t>(gz.size() / 2));
    write_file_atomic(dir / "cut.gz", cut);
    expect_error(ErrorCode::TruncatedPayload, [&] { read_idx(dir / "cut.gz"); });
}

TEST(Idx, DatasetScaling) {
    IdxTensor images;
    images.dims = {2, 2};
    images.u8 = {0, 255, 51, 102};
    IdxTensor labels;
    labels.dims = {2};
    labels.u8 = {3, 1};
    const nn::Dataset d = dataset_from_idx(images, labels);
    EXPECT_EQ(d.x(0, 1), 1.0);
    EXPECT_EQ(d.x(1, 0), 0.2);
    EXPECT_EQ(d.classes, 4u);
    EXPECT_EQ(dataset_from_idx(images, labels, 1).size(), 1u);
    labels.dims = {3};
    labels.u8.push_back(0);
    expect_error(ErrorCode::ShapeMismatch, [&] { dataset_from_idx(images, labels); });
}

WeightBlob sample_blob(BlobKind kind) {
    WeightBlob b;
    b.kind = kind;
    BlobRecord r;
    r.name = "fc1";
    r.dims = {2, 3};
    switch (kind) {
        case BlobKind::FullPrecision:
            r.values = {0.1, -0.2, 1e-300, -0.0, 3.5, 1.0 / 3.0};
            break;
        case BlobKind::QuantizedOneScale:
            r.scales = {0.4};
            r.qkind = QuantKind::Log;
            r.bits = 3;
            r.codes = {-3, -2, -1, 0, 1, 3};
            break;
        case BlobKind::QuantizedTwoScale:
            r.scales = {0.65, 0.5};
            r.codes = {1, 0, -1, 1, 1, 0};
            break;
        case BlobKind::OptimizerState:
            r.scales = {17};
            r.values = {1, 2, 3, 4, 5, 6, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
            break;
    }
    b.records.push_back(r);
    r.name = "fc2";
    b.records.push_back(r);
    return b;
}

TEST(Blob, RoundTripEveryKind) {
    for (BlobKind k : {BlobKind::FullPrecision, BlobKind::QuantizedOneScale, BlobKind::QuantizedTwoScale,
                       BlobKind::OptimizerState}) {
        const WeightBlob b = sample_blob(k);
        const Bytes bytes = write_blob(b);
        const WeightBlob back = read_blob(bytes);
        EXPECT_EQ(back, b);
        EXPECT_EQ(write_blob(back), bytes);
    }
}

TEST(Blob, RoundTripRandomNetwork) {
    nn::TrainConfig c;
    c.hidden = {5};
    c.seed = 9;
    nn::TrainState s = nn::init_state(c, 4, 3);
    Rng rng(1);
    for (auto& p : s.optim) {
        for (double& m : p.w.m) m = rng.uniform(-1, 1);
        for (double& v : p.w.v) v = rng.uniform(0, 1);
        p.w.t = 42;
    }
    for (const WeightBlob& b : {weights_blob(s.net), params_blob(s.net), optimizer_blob(s), curvature_blob(s)}) {
        EXPECT_EQ(read_blob(write_blob(b)), b);
    }
    const nn::Network net = network_from_blobs(read_blob(write_blob(weights_blob(s.net))),
                                               read_blob(write_blob(params_blob(s.net))));
    ASSERT_EQ(net.layers.size(), s.net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        EXPECT_EQ(net.layers[l].w, s.net.layers[l].w);
        EXPECT_EQ(net.layers[l].bn.gamma, s.net.layers[l].bn.gamma);
        EXPECT_EQ(net.layers[l].spec.activation, s.net.layers[l].spec.activation);
    }
}

TEST(Blob, OneScaleLayout) {
    const Bytes bytes = write_blob(sample_blob(BlobKind::QuantizedOneScale));
    ASSERT_GE(bytes.size(), 16u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "LAWQ");
    EXPECT_EQ(bytes[4], 1);  // version, little-endian
    EXPECT_EQ(bytes[8], 1);  // quantized_one_scale
    // Record: name_len(4) "fc1" rank(4) dims(16) scale_count(4) scale(8) qkind bits code_count(8) codes.
    std::size_t off = 16 + 4 + 3 + 4 + 16 + 4;
    double scale;
    std::memcpy(&scale, bytes.data() + off, 8);
    EXPECT_EQ(scale, 0.4);
    off += 8;
    EXPECT_EQ(bytes[off], static_cast<std::uint8_t>(QuantKind::Log));
    EXPECT_EQ(bytes[off + 1], 3);
    off += 2 + 8;
    EXPECT_EQ(static_cast<std::int8_t>(bytes[off]), -3);
    EXPECT_EQ(static_cast<std::int8_t>(bytes[off + 5]), 3);
}

TEST(Blob, RejectsMalformed) {
    const Bytes good = write_blob(sample_blob(BlobKind::FullPrecision));
    for (std::size_t cut = 4; cut < good.size(); cut += 7) {
        const Bytes part(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cut));
        expect_error(ErrorCode::CorruptRecord, [&] { read_blob(part); });
    }
    Bytes trailing = good;
    trailing.push_back(0);
    expect_error(ErrorCode::CorruptRecord, [&] { read_blob(trailing); });
    Bytes version = good;
    version[4] = 2;
    expect_error(ErrorCode::VersionMismatch, [&] { read_blob(version); });
    Bytes magic = good;
    magic[0] = 'X';
    expect_error(ErrorCode::BadMagic, [&] { read_blob(magic); });

    WeightBlob b = sample_blob(BlobKind::QuantizedOneScale);
    b.records[0].codes[0] = 4;  // outside [-3, 3]
    expect_error(ErrorCode::CorruptRecord, [&] { write_blob(b); });
    b = sample_blob(BlobKind::QuantizedTwoScale);
    b.records[0].codes[0] = 2;
    expect_error(ErrorCode::CorruptRecord, [&] { write_blob(b); });
    b = sample_blob(BlobKind::FullPrecision);
    b.records[0].values.pop_back();
    expect_error(ErrorCode::CorruptRecord, [&] { write_blob(b); });
}

TEST(Config, MethodIds) {
    EXPECT_EQ(parse_config("[quantizer]\nmethod=lat-exact\n").train.method.method, Method::LatExact);
    const RunConfig c = parse_config("[quantizer]\nmethod=laq\nbits=3\nscheme=log\n");
    EXPECT_EQ(c.train.method.label(), "LAQ3(log)");
    EXPECT_EQ(c.train.method.bits, 3);
    EXPECT_EQ(parse_config("[quantizer]\nmethod = LAQ3(log)  # table label\n").train.method.label(), "LAQ3(log)");
}

TEST(Config, FullDocument) {
    const RunConfig c = parse_config(R"(# comment
[train]
epochs = 3
batch_size = 50
hidden = 64, 32
batch_norm = false
seed = 5
loss = softmax
clip_gradients = true
[quantizer]
method = twn
[schedule]
kind = milestone
initial_lr = 0.005
factor = 0.1
milestones = 1,2
[data]
source = synthetic
val_fraction = 0.2
synthetic_train = 40
synthetic_test = 10
)",
                                     "/base");
    EXPECT_EQ(c.train.epochs, 3u);
    EXPECT_EQ(c.train.batch_size, 50u);
    EXPECT_EQ(c.train.hidden, (std::vector<std::size_t>{64, 32}));
    EXPECT_FALSE(c.train.batch_norm);
    EXPECT_EQ(c.train.seed, 5u);
    EXPECT_EQ(c.train.loss, nn::LossKind::SoftmaxCrossEntropy);
    EXPECT_TRUE(c.train.clip_gradients);
    EXPECT_EQ(c.train.schedule.milestones, (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(c.train.schedule.initial, 0.005);
    EXPECT_EQ(c.data.source, DataConfig::Source::Synthetic);
    const nn::DataSplits s = load_data(c.data);
    EXPECT_EQ(s.train.size(), 32u);
    EXPECT_EQ(s.val.size(), 8u);
    EXPECT_EQ(s.test.size(), 10u);
}

TEST(Config, RelativePaths) {
    const RunConfig c = parse_config(
        "[quantizer]\nmethod=twn\n[data]\ntrain_images=a\ntrain_labels=b\ntest_images=/abs/c\ntest_labels=d\n", "/base");
    EXPECT_EQ(c.data.train_images, std::filesystem::path("/base/a"));
    EXPECT_EQ(c.data.test_images, std::filesystem::path("/abs/c"));
}

TEST(Config, Errors) {
    expect_error(ErrorCode::UnknownKey, [] { parse_config("[quantizer]\nmethod=twn\nbitz=3\n"); });
    expect_error(ErrorCode::UnknownKey, [] { parse_config("[quantiser]\nmethod=twn\n"); });
    expect_error(ErrorCode::MissingRequired, [] { parse_config("[train]\nepochs=2\n"); });
    expect_error(ErrorCode::BadValue, [] { parse_config("[quantizer]\nmethod=twn\n[train]\nepochs=two\n"); });
    expect_error(ErrorCode::BadValue, [] { parse_config("[quantizer]\nmethod=twn\nmethod=bwn\n"); });
    expect_error(ErrorCode::BadValue, [] { parse_config("[quantizer]\nmethod=nope\n"); });
    expect_error(ErrorCode::BadValue, [] { parse_config("method=twn\n"); });
    expect_error(ErrorCode::BadValue, [] { parse_config("[quantizer]\nmethod=LAQ3(log)\nbits=4\n"); });
    expect_error(ErrorCode::MissingRequired, [] { load_data(parse_config("[quantizer]\nmethod=twn\n[data]\nsource=idx\n").data); });
}

TEST(Histogram, QuantizedRowsAtLevels) {
    QuantizedLayer layer;
    layer.alpha = 0.4;
    layer.qset = QuantSet::build(3, Scheme::Log);
    layer.codes = {-3, -3, 0, 1, 2, 3, 3, 3, -1};
    const std::vector<HistogramRow> rows = export_histogram(layer);
    std::vector<double> allowed;
    for (double q : layer.qset.values()) allowed.push_back(0.4 * q);
    std::size_t total = 0;
    for (const HistogramRow& r : rows) {
        EXPECT_EQ(r.left, r.right);
        EXPECT_NE(std::find(allowed.begin(), allowed.end(), r.left), allowed.end());
        total += r.count;
    }
    EXPECT_EQ(total, layer.codes.size());
    EXPECT_LE(rows.size(), layer.qset.size());
}

TEST(Histogram, SingleBinAndSymmetry) {
    const std::vector<double> w{0.3, -0.1, 0.0, 0.9, -0.9, 0.2};
    const std::vector<HistogramRow> one = export_histogram(w, 1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].count, w.size());

    std::vector<double> sym;
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        const double x = rng.uniform(-1, 1);
        sym.push_back(x);
        sym.push_back(-x);
    }
    for (std::size_t bins : {4, 7, 10}) {
        const std::vector<HistogramRow> rows = export_histogram(sym, bins);
        std::size_t total = 0;
        for (std::size_t b = 0; b < bins; ++b) {
            total += rows[b].count;
            // Bin edges exactly on a weight can shift a count by one across the mirror.
            EXPECT_NEAR(static_cast<double>(rows[b].count), static_cast<double>(rows[bins - 1 - b].count), 1.0);
        }
        EXPECT_EQ(total, sym.size());
    }
    EXPECT_THROW(export_histogram(w, 0), Error);
}

TEST(Histogram, FullPrecisionFiftyBins) {
    std::vector<double> w;
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) w.push_back(rng.uniform(-0.3, 0.7));
    const std::vector<HistogramRow> rows = export_histogram(w, 50);
    ASSERT_EQ(rows.size(), 50u);
    std::size_t total = 0;
    for (const HistogramRow& r : rows) total += r.count;
    EXPECT_EQ(total, 1000u);
    EXPECT_EQ(rows.back().right, *std::max_element(w.begin(), w.end()));
    EXPECT_EQ(histogram_csv(rows).rfind("bin_left,bin_right,count\n", 0), 0u);
}

TEST(Csv, MetricsLayoutIsLocaleIndependent) {
    std::vector<nn::MetricsRow> rows(2);
    rows[0] = {0, "train", 1.5, 0.25, {0.125, std::nullopt}, 0.0};
    rows[1] = {0, "test", 1234567.5, 0.5, {0.5, 2.0}, 0.0};
    const char* old = std::setlocale(LC_NUMERIC, nullptr);
    const std::string saved = old ? old : "C";
    std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
    const std::string csv = metrics_csv(rows, 2);
    std::setlocale(LC_NUMERIC, saved.c_str());
    EXPECT_EQ(csv,
              "epoch,split,loss,error_rate,alpha_l1,alpha_l2,wall_seconds\n"
              "0,train,1.5,0.25,0.125,,0\n"
              "0,test,1234567.5,0.5,0.5,2,0\n");
}

TEST(Csv, Trajectory) {
    std::vector<nn::StepRecord> recs(1);
    recs[0] = {3, 0, 1, 0.5, 0.25, 4, true, false};
    EXPECT_EQ(trajectory_csv(recs), "step,epoch,layer,alpha,beta,iterations,converged,degenerate\n3,0,2,0.5,0.25,4,1,0\n");
}

TEST(Files, AtomicWriteLeavesNoTemporaries) {
    TempDir dir;
    write_file_atomic(dir / "a.txt", std::string_view("hello"));
    write_file_atomic(dir / "a.txt", std::string_view("again"));
    const Bytes b = read_file(dir / "a.txt");
    EXPECT_EQ(std::string(b.begin(), b.end()), "again");
    std::size_t entries = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
        (void)e;
        ++entries;
    }
    EXPECT_EQ(entries, 1u);
    expect_error(ErrorCode::Io, [&] { read_file(dir / "missing"); });
    expect_error(ErrorCode::Io, [&] { write_file_atomic(dir / "no" / "such" / "dir.txt", std::string_view("x")); });
}

}  // namespace
}  // namespace lawq::io
