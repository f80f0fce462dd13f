#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "lawq/cli/cli.hpp"
#include "lawq/dataio/blob.hpp"
#include "lawq/dataio/files.hpp"
#include "temp_dir.hpp"

namespace lawq::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome call(std::vector<std::string> args) {
    args.insert(args.begin(), "lawq");
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    const std::vector<std::uint8_t> b = io::read_file(p);
    return std::string(b.begin(), b.end());
}

void write_vector_blob(const fs::path& path, std::vector<double> values) {
    io::WeightBlob blob;
    io::BlobRecord r;
    r.name = "fc1";
    r.dims = {1, values.size()};
    r.values = std::move(values);
    blob.records.push_back(std::move(r));
    io::write_file_atomic(path, io::write_blob(blob));
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        write_vector_blob(dir / "w.lawq", {0.9, 0.4, -0.1});
        write_vector_blob(dir / "d.lawq", {1.0, 1.0, 1.0});
        write_vector_blob(dir / "zero.lawq", {0.0, 0.0});
        std::ofstream(dir / "small.ini") << "[quantizer]\nmethod = lat-approx\n"
                                            "[train]\nepochs = 2\nbatch_size = 20\nhidden = 8\n"
                                            "[data]\nsource = synthetic\nsynthetic_train = 100\n"
                                            "synthetic_test = 40\nsynthetic_features = 6\nsynthetic_classes = 3\n";
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }

    TempDir dir;
};

TEST_F(CliTest, QuantizeLatExactReportsAlpha) {
    const Outcome o = call({"quantize", "--input", path("w.lawq"), "--curvature", path("d.lawq"), "--method",
                            "lat-exact", "--output", path("q.lawq"), "--report", path("r.csv")});
    ASSERT_EQ(o.code, kExitOk) << o.err;
    const std::string report = slurp(dir / "r.csv");
    EXPECT_EQ(report.rfind("layer,alpha,beta,objective,iterations,converged\n", 0), 0u);
    EXPECT_NE(report.find("fc1,0.65,,"), std::string::npos) << report;
    const io::WeightBlob q = io::read_blob(io::read_file(dir / "q.lawq"));
    EXPECT_EQ(q.kind, io::BlobKind::QuantizedOneScale);
    EXPECT_EQ(q.records[0].codes, (std::vector<std::int8_t>{1, 1, 0}));
}

TEST_F(CliTest, CurvatureFlagContract) {
    EXPECT_EQ(call({"quantize", "--input", path("w.lawq"), "--method", "twn", "--output", path("t.lawq")}).code, kExitOk);
    EXPECT_EQ(call({"quantize", "--input", path("w.lawq"), "--method", "lat-exact", "--output", path("x.lawq")}).code,
              kExitUsage);
    EXPECT_EQ(call({"quantize", "--input", path("w.lawq"), "--curvature", path("d.lawq"), "--method", "twn", "--output",
                    path("x.lawq")})
                  .code,
              kExitUsage);
    EXPECT_FALSE(fs::exists(dir / "x.lawq"));
    EXPECT_EQ(call({"quantize", "--input", path("w.lawq"), "--method", "twn"}).code, kExitUsage);
}

TEST_F(CliTest, LaqTwoBitsMatchesLatApprox) {
    ASSERT_EQ(call({"quantize", "--input", path("w.lawq"), "--curvature", path("d.lawq"), "--method", "laq", "--bits",
                    "2", "--scheme", "linear", "--output", path("a.lawq")})
                  .code,
              kExitOk);
    ASSERT_EQ(call({"quantize", "--input", path("w.lawq"), "--curvature", path("d.lawq"), "--method", "lat-approx",
                    "--output", path("b.lawq")})
                  .code,
              kExitOk);
    EXPECT_EQ(slurp(dir / "a.lawq"), slurp(dir / "b.lawq"));
}

TEST_F(CliTest, DegenerateInputIsDomainError) {
    const Outcome o = call({"quantize", "--input", path("zero.lawq"), "--method", "twn", "--output", path("z.lawq")});
    EXPECT_EQ(o.code, kExitDomain);
    EXPECT_NE(o.err.find("DegenerateInput"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "z.lawq"));
}

TEST_F(CliTest, TrainIsDeterministic) {
    const Outcome a = call({"train", "--config", path("small.ini"), "--seed", "3", "--out", path("run1")});
    const Outcome b = call({"train", "--config", path("small.ini"), "--seed", "3", "--out", path("run2")});
    ASSERT_EQ(a.code, kExitOk) << a.err;
    ASSERT_EQ(b.code, kExitOk) << b.err;
    EXPECT_NE(a.out.find("seed=3"), std::string::npos);
    EXPECT_EQ(slurp(dir / "run1" / "metrics.csv"), slurp(dir / "run2" / "metrics.csv"));
    for (const char* f : {"alpha_trajectory.csv", "timing.csv", "weights.lawq", "params.lawq", "quantized.lawq",
                          "optimizer.lawq", "curvature.lawq"}) {
        EXPECT_TRUE(fs::exists(dir / "run1" / f)) << f;
    }
    // Alpha columns are filled for every layer in every row.
    std::istringstream metrics(slurp(dir / "run1" / "metrics.csv"));
    std::string line;
    std::getline(metrics, line);
    EXPECT_EQ(line, "epoch,split,loss,error_rate,alpha_l1,alpha_l2,wall_seconds");
    int rows = 0;
    while (std::getline(metrics, line)) {
        ++rows;
        EXPECT_EQ(line.find(",,"), std::string::npos) << line;
    }
    EXPECT_EQ(rows, 6);  // 2 epochs x {train, val, test}
}

TEST_F(CliTest, TrainFullPrecisionHasEmptyAlpha) {
    std::ofstream(dir / "fp.ini") << "[quantizer]\nmethod = full_precision\n"
                                     "[train]\nepochs = 1\nbatch_size = 20\nhidden = 8\n"
                                     "[data]\nsource = synthetic\nsynthetic_train = 60\nsynthetic_test = 20\n";
    ASSERT_EQ(call({"train", "--config", path("fp.ini"), "--out", path("fp")}).code, kExitOk);
    const std::string metrics = slurp(dir / "fp" / "metrics.csv");
    EXPECT_NE(metrics.find("0,test,"), std::string::npos);
    EXPECT_NE(metrics.find(",,,0\n"), std::string::npos) << metrics;
}

TEST_F(CliTest, TrainDatasetErrorIsDomainError) {
    std::ofstream(dir / "missing.ini") << "[quantizer]\nmethod = twn\n[data]\ntrain_images = nope\n"
                                          "train_labels = nope\ntest_images = nope\ntest_labels = nope\n";
    EXPECT_EQ(call({"train", "--config", path("missing.ini"), "--out", path("m")}).code, kExitDomain);
    EXPECT_FALSE(fs::exists(dir / "m" / "metrics.csv"));
    std::ofstream(dir / "typo.ini") << "[quantizer]\nmethod = twn\nbitz = 3\n";
    EXPECT_EQ(call({"train", "--config", path("typo.ini"), "--out", path("m")}).code, kExitUsage);
}

TEST_F(CliTest, CompareGridAndSummary) {
    const Outcome o = call({"compare", "--config", path("small.ini"), "--methods", "full_precision,twn,lat-approx",
                            "--seeds", "0,1,2", "--out", path("cmp")});
    ASSERT_EQ(o.code, kExitOk) << o.err;
    std::istringstream summary(slurp(dir / "cmp" / "summary.csv"));
    std::string line;
    std::getline(summary, line);
    EXPECT_EQ(line, "method,seed,final_test_error,mean,std");
    int runs = 0, aggregates = 0;
    while (std::getline(summary, line)) (line.find(",all,") != std::string::npos ? aggregates : runs)++;
    EXPECT_EQ(runs, 9);
    EXPECT_EQ(aggregates, 3);
    EXPECT_TRUE(fs::exists(dir / "cmp" / "twn_seed1" / "metrics.csv"));
}

TEST_F(CliTest, CompareRejectsUnknownMethodFirst) {
    const Outcome o = call({"compare", "--config", path("small.ini"), "--methods", "twn,latt", "--out", path("bad")});
    EXPECT_EQ(o.code, kExitUsage);
    EXPECT_FALSE(fs::exists(dir / "bad"));
}

TEST_F(CliTest, VerifySuites) {
    const Outcome twn = call({"verify", "--suite", "twn-reduction", "--trials", "1000"});
    EXPECT_EQ(twn.code, kExitOk) << twn.out;
    EXPECT_NE(twn.out.find("seed=0"), std::string::npos);
    EXPECT_NE(twn.out.find("twn-reduction,1000,0,"), std::string::npos);
    EXPECT_EQ(call({"verify", "--suite", "properties", "--trials", "200"}).code, kExitOk);
    EXPECT_EQ(call({"verify", "--suite", "properties", "--trials", "0"}).code, kExitUsage);
    EXPECT_EQ(call({"verify", "--suite", "nope"}).code, kExitUsage);
}

TEST_F(CliTest, ExportHistogram) {
    ASSERT_EQ(call({"quantize", "--input", path("w.lawq"), "--curvature", path("d.lawq"), "--method", "LAQ3(log)",
                    "--output", path("q3.lawq")})
                  .code,
              kExitOk);
    ASSERT_EQ(call({"export-hist", "--input", path("q3.lawq"), "--layer", "fc1", "--out", path("h.csv")}).code, kExitOk);
    std::istringstream h(slurp(dir / "h.csv"));
    std::string line;
    int rows = 0;
    std::getline(h, line);
    while (std::getline(h, line)) ++rows;
    EXPECT_LE(rows, 7);

    std::vector<double> w(300);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::sin(static_cast<double>(i));
    write_vector_blob(dir / "big.lawq", w);
    ASSERT_EQ(call({"export-hist", "--input", path("big.lawq"), "--layer", "fc1", "--bins", "50", "--out",
                    path("h50.csv")})
                  .code,
              kExitOk);
    std::istringstream h50(slurp(dir / "h50.csv"));
    std::getline(h50, line);
    rows = 0;
    std::size_t total = 0;
    while (std::getline(h50, line)) {
        ++rows;
        total += std::stoul(line.substr(line.rfind(',') + 1));
    }
    EXPECT_EQ(rows, 50);
    EXPECT_EQ(total, 300u);

    const Outcome missing = call({"export-hist", "--input", path("big.lawq"), "--layer", "fc7", "--out", path("x.csv")});
    EXPECT_EQ(missing.code, kExitDomain);
    EXPECT_NE(missing.err.find("layers: fc1"), std::string::npos) << missing.err;
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(call({}).code, kExitUsage);
    EXPECT_EQ(call({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(call({"train", "--out", path("o")}).code, kExitUsage);
    EXPECT_EQ(call({"--help"}).code, kExitOk);
}

}  // namespace
}  // namespace lawq::cli
