#include "lawq/cli/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "lawq/dataio/blob.hpp"
#include "lawq/dataio/checkpoint.hpp"
#include "lawq/dataio/config.hpp"
#include "lawq/dataio/files.hpp"
#include "lawq/dataio/report.hpp"
#include "lawq/error.hpp"
#include "lawq/format.hpp"
#include "lawq/oracles.hpp"

namespace lawq::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed flags or configs are the caller's mistake, not a domain failure.
bool is_usage_code(ErrorCode code) {
    return code == ErrorCode::UnknownKey || code == ErrorCode::BadValue || code == ErrorCode::MissingRequired;
}

io::WeightBlob load_blob(const std::string& path) { return io::read_blob(io::read_file(path)); }

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const std::string& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

// ---- quantize ---------------------------------------------------------------

struct QuantizeArgs {
    std::string input;
    std::string curvature;
    std::string method;
    std::optional<int> bits;
    std::optional<std::string> scheme;
    std::string output;
    std::string report;
    AlternationOptions alternation;
};

MethodSpec resolve_method(const QuantizeArgs& a) {
    MethodSpec spec = parse_method(a.method);
    const bool labelled = a.method.starts_with("LAQ");
    if (a.bits) {
        const bool multi_bit = spec.method == Method::Laq || spec.method == Method::Dorefa;
        if (!multi_bit && *a.bits != 2) throw UsageError("--bits applies only to laq and dorefa");
        if (labelled && *a.bits != spec.bits) throw UsageError("--bits conflicts with " + a.method);
        if (*a.bits < 2 || *a.bits > QuantSet::kMaxBits) {
            throw UsageError("--bits must lie in [2, " + std::to_string(QuantSet::kMaxBits) + "]");
        }
        spec.bits = *a.bits;
    }
    if (a.scheme) {
        if (spec.method != Method::Laq) throw UsageError("--scheme applies only to laq");
        const Scheme s = parse_scheme(*a.scheme);
        if (labelled && s != spec.scheme) throw UsageError("--scheme conflicts with " + a.method);
        spec.scheme = s;
    }
    if (spec.loss_aware() && a.curvature.empty()) {
        throw UsageError("--curvature is required for " + std::string(to_string(spec.method)));
    }
    if (!spec.loss_aware() && !a.curvature.empty()) {
        throw UsageError("--curvature is not used by " + std::string(to_string(spec.method)));
    }
    return spec;
}

int cmd_quantize(const QuantizeArgs& a, std::ostream& out) {
    const MethodSpec spec = resolve_method(a);
    const io::WeightBlob weights = load_blob(a.input);
    if (weights.kind != io::BlobKind::FullPrecision) fail(ErrorCode::InvalidArgument, a.input + " is not a full-precision blob");
    std::optional<io::WeightBlob> curvature;
    if (!a.curvature.empty()) {
        curvature = load_blob(a.curvature);
        if (curvature->kind != io::BlobKind::FullPrecision) {
            fail(ErrorCode::InvalidArgument, a.curvature + " is not a full-precision blob");
        }
    }

    io::WeightBlob result;
    const bool two_scale = spec.method == Method::Lat2Exact || spec.method == Method::Lat2Approx;
    result.kind = !spec.uses_codes() ? io::BlobKind::FullPrecision
                  : two_scale        ? io::BlobKind::QuantizedTwoScale
                                     : io::BlobKind::QuantizedOneScale;
    std::string report = "layer,alpha,beta,objective,iterations,converged\n";
    for (const io::BlobRecord& rec : weights.records) {
        std::vector<double> d;
        if (curvature) {
            const io::BlobRecord* c = curvature->find(rec.name);
            if (!c) fail(ErrorCode::ShapeMismatch, "curvature blob has no record '" + rec.name + "'");
            if (c->dims != rec.dims) fail(ErrorCode::ShapeMismatch, "curvature for '" + rec.name + "' has other dims");
            d = clamp_curvature(c->values);
        }
        const LayerQuantization q = quantize_with(spec, rec.values, d, {}, a.alternation);
        if (q.info.degenerate) fail(ErrorCode::DegenerateInput, "layer '" + rec.name + "' quantized to all zeros");

        double objective = 0.0;
        for (std::size_t i = 0; i < rec.values.size(); ++i) {
            const double diff = q.w_hat[i] - rec.values[i];
            objective += 0.5 * (d.empty() ? 1.0 : d[i]) * diff * diff;
        }
        std::string alpha, beta;
        if (q.layer) {
            alpha = format_double(q.layer->alpha);
            if (q.layer->beta) beta = format_double(*q.layer->beta);
            result.records.push_back(io::record_from_layer(rec.name, rec.dims, *q.layer));
        } else {
            io::BlobRecord r;
            r.name = rec.name;
            r.dims = rec.dims;
            r.values = q.w_hat;
            result.records.push_back(std::move(r));
        }
        report += rec.name + ',' + alpha + ',' + beta + ',' + format_double(objective) + ',' +
                  std::to_string(q.info.iterations) + ',' + (q.info.converged ? "1" : "0") + '\n';
    }
    const std::vector<std::uint8_t> bytes = io::write_blob(result);
    if (!a.report.empty()) io::write_file_atomic(a.report, report);
    io::write_file_atomic(a.output, bytes);
    out << "method=" << spec.label() << '\n' << report;
    return kExitOk;
}

// ---- train / compare ----------------------------------------------------------

struct RunOutput {
    nn::TrainResult result;
    double final_test_error = 0.0;
};

RunOutput train_and_write(const io::RunConfig& cfg, const nn::DataSplits& data, const fs::path& dir,
                          std::ostream& out) {
    RunOutput run;
    run.result = nn::train(cfg.train, data, [&](std::size_t epoch, const nn::TrainState&, std::span<const nn::MetricsRow> rows) {
        out << "epoch " << epoch;
        for (const nn::MetricsRow& r : rows) out << ' ' << r.split << "_error=" << format_double(r.error_rate);
        out << '\n';
    });
    const nn::TrainResult& res = run.result;
    for (const nn::MetricsRow& r : res.metrics) {
        if (r.split == "test") run.final_test_error = r.error_rate;
    }

    const std::size_t layers = res.state.net.layers.size();
    std::string timing = "epoch,seconds\n";
    for (std::size_t e = 0; e < res.epoch_seconds.size(); ++e) {
        timing += std::to_string(e) + ',' + format_double(res.epoch_seconds[e]) + '\n';
    }
    // Everything is serialized before the first write.
    const std::vector<std::pair<std::string, std::vector<std::uint8_t>>> blobs = {
        {"weights.lawq", io::write_blob(io::weights_blob(res.state.net))},
        {"params.lawq", io::write_blob(io::params_blob(res.state.net))},
        {"quantized.lawq", io::write_blob(io::quantized_blob(res.state.net, res.final_quant))},
        {"optimizer.lawq", io::write_blob(io::optimizer_blob(res.state))},
        {"curvature.lawq", io::write_blob(io::curvature_blob(res.state))},
    };
    const std::string metrics = io::metrics_csv(res.metrics, layers);
    const std::string trajectory = io::trajectory_csv(res.trajectory);

    fs::create_directories(dir);
    for (const auto& [name, bytes] : blobs) io::write_file_atomic(dir / name, bytes);
    io::write_file_atomic(dir / "alpha_trajectory.csv", trajectory);
    io::write_file_atomic(dir / "timing.csv", timing);
    io::write_file_atomic(dir / "metrics.csv", metrics);
    return run;
}

struct TrainArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
    io::RunConfig cfg = io::load_config(a.config);
    if (a.seed) cfg.train.seed = *a.seed;
    out << "seed=" << cfg.train.seed << " method=" << cfg.train.method.label() << '\n';
    const nn::DataSplits data = io::load_data(cfg.data);
    const RunOutput run = train_and_write(cfg, data, a.out_dir, out);
    out << "final_test_error=" << format_double(run.final_test_error) << '\n';
    if (run.result.degenerate_events > 0) out << "degenerate_events=" << run.result.degenerate_events << '\n';
    return kExitOk;
}

struct CompareArgs {
    std::string config;
    std::vector<std::string> methods;
    std::vector<std::uint64_t> seeds{0};
    std::string out_dir;
};

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
    io::RunConfig base = io::load_config(a.config);
    std::vector<MethodSpec> specs;
    for (const std::string& m : a.methods) {
        MethodSpec spec = parse_method(m);
        // Plain ids inherit the bit width and scheme from the config.
        if (spec.method == base.train.method.method && !m.starts_with("LAQ")) {
            spec.bits = base.train.method.bits;
            spec.scheme = base.train.method.scheme;
        }
        specs.push_back(spec);
    }
    out << "seeds=";
    for (std::size_t i = 0; i < a.seeds.size(); ++i) out << (i ? "," : "") << a.seeds[i];
    out << '\n';

    const nn::DataSplits data = io::load_data(base.data);
    std::string rows = "method,seed,final_test_error,mean,std\n";
    std::string summary;
    bool any_failed = false;
    for (const MethodSpec& spec : specs) {
        std::vector<double> errors;
        for (std::uint64_t seed : a.seeds) {
            io::RunConfig cfg = base;
            cfg.train.method = spec;
            cfg.train.seed = seed;
            const fs::path dir = fs::path(a.out_dir) / (spec.label() + "_seed" + std::to_string(seed));
            out << "run " << spec.label() << " seed=" << seed << '\n';
            try {
                const RunOutput run = train_and_write(cfg, data, dir, out);
                errors.push_back(run.final_test_error);
                rows += spec.label() + ',' + std::to_string(seed) + ',' + format_double(run.final_test_error) + ",,\n";
            } catch (const Error& e) {
                any_failed = true;
                err << "run " << spec.label() << " seed=" << seed << " failed: " << e.what() << '\n';
                rows += spec.label() + ',' + std::to_string(seed) + ",failed,,\n";
            }
        }
        double mean = std::nan("");
        double stdev = std::nan("");
        if (!errors.empty()) {
            mean = 0.0;
            for (double e : errors) mean += e;
            mean /= static_cast<double>(errors.size());
            double ss = 0.0;
            for (double e : errors) ss += (e - mean) * (e - mean);
            stdev = errors.size() > 1 ? std::sqrt(ss / static_cast<double>(errors.size() - 1)) : 0.0;
        }
        summary += spec.label() + ",all,," + format_double(mean) + ',' + format_double(stdev) + '\n';
    }
    const std::string csv = rows + summary;
    fs::create_directories(a.out_dir);
    io::write_file_atomic(fs::path(a.out_dir) / "summary.csv", csv);
    out << csv;
    return any_failed ? kExitDomain : kExitOk;
}

// ---- verify -------------------------------------------------------------------

struct VerifyArgs {
    std::string suite;
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    std::size_t grid_resolution = 100000;
    std::string report;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
    if (a.trials == 0) throw UsageError("--trials must be positive");
    oracle::SuiteOptions opts;
    opts.trials = a.trials;
    opts.seed = a.seed;
    opts.grid_resolution = a.grid_resolution;
    const oracle::Suite suite = oracle::parse_suite(a.suite);
    const oracle::OracleReport report = oracle::run_suite(suite, opts);
    const std::string csv = oracle::report_csv(report);
    if (!a.report.empty()) io::write_file_atomic(a.report, csv);
    out << "seed=" << a.seed << '\n' << csv;
    out << (report.passed() ? "PASS" : "FAIL") << ' ' << report.suite << ": " << report.failures.size() << " of "
        << report.trials << " trials failed\n";
    return report.passed() ? kExitOk : kExitDomain;
}

// ---- export-hist --------------------------------------------------------------

struct HistArgs {
    std::string input;
    std::string layer;
    std::size_t bins = 50;
    std::string out_path;
};

int cmd_export_hist(const HistArgs& a, std::ostream& out) {
    if (a.bins == 0) throw UsageError("--bins must be positive");
    const io::WeightBlob blob = load_blob(a.input);
    const io::BlobRecord* rec = blob.find(a.layer);
    if (!rec) {
        fail(ErrorCode::InvalidArgument, "no layer '" + a.layer + "' in " + a.input + "; layers: " + join(blob.names()));
    }
    std::vector<io::HistogramRow> rows;
    switch (blob.kind) {
        case io::BlobKind::FullPrecision:
            rows = io::export_histogram(rec->values, a.bins);
            break;
        case io::BlobKind::QuantizedOneScale:
        case io::BlobKind::QuantizedTwoScale:
            rows = io::export_histogram(io::layer_from_record(*rec, blob.kind));
            break;
        case io::BlobKind::OptimizerState:
            fail(ErrorCode::InvalidArgument, a.input + " holds optimizer state, not weights");
    }
    io::write_file_atomic(a.out_path, io::histogram_csv(rows));
    out << "layer=" << a.layer << " rows=" << rows.size() << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Loss-aware weight quantization", "lawq"};
    app.require_subcommand(1);

    QuantizeArgs qa;
    CLI::App* quantize = app.add_subcommand("quantize", "Quantize the layers of a weight blob");
    quantize->add_option("--input", qa.input, "Full-precision weight blob")->required();
    quantize->add_option("--curvature", qa.curvature, "Full-precision curvature blob (loss-aware methods)");
    quantize->add_option("--method", qa.method, "Method id")->required();
    quantize->add_option("--bits", qa.bits, "Bit width for laq / dorefa");
    quantize->add_option("--scheme", qa.scheme, "linear or log (laq)");
    quantize->add_option("--output", qa.output, "Quantized blob to write")->required();
    quantize->add_option("--report", qa.report, "Per-layer report CSV");
    quantize->add_option("--max-iterations", qa.alternation.max_iterations)->check(CLI::PositiveNumber);
    quantize->add_option("--tolerance", qa.alternation.tolerance)->check(CLI::PositiveNumber);

    TrainArgs ta;
    CLI::App* train = app.add_subcommand("train", "Train a network under one method");
    train->add_option("--config", ta.config)->required()->check(CLI::ExistingFile);
    train->add_option("--seed", ta.seed, "Overrides [train] seed (default 0)");
    train->add_option("--out", ta.out_dir, "Output directory")->required();

    CompareArgs ca;
    CLI::App* compare = app.add_subcommand("compare", "Train every (method, seed) pair and summarize");
    compare->add_option("--config", ca.config)->required()->check(CLI::ExistingFile);
    compare->add_option("--methods", ca.methods)->required()->delimiter(',');
    compare->add_option("--seeds", ca.seeds)->delimiter(',');
    compare->add_option("--out", ca.out_dir)->required();

    VerifyArgs va;
    CLI::App* verify = app.add_subcommand("verify", "Run an oracle verification suite");
    verify->add_option("--suite", va.suite)->required();
    verify->add_option("--trials", va.trials);
    verify->add_option("--seed", va.seed);
    verify->add_option("--grid-resolution", va.grid_resolution)->check(CLI::Range(1000, 100000000));
    verify->add_option("--report", va.report, "Write the report CSV here as well");

    HistArgs ha;
    CLI::App* hist = app.add_subcommand("export-hist", "Histogram of one layer of a blob");
    hist->add_option("--input", ha.input)->required();
    hist->add_option("--layer", ha.layer)->required();
    hist->add_option("--bins", ha.bins);
    hist->add_option("--out", ha.out_path)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*quantize) return cmd_quantize(qa, out);
        if (*train) return cmd_train(ta, out);
        if (*compare) return cmd_compare(ca, out, err);
        if (*verify) return cmd_verify(va, out);
        if (*hist) return cmd_export_hist(ha, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return is_usage_code(e.code()) ? kExitUsage : kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    }
    return kExitUsage;
}

}  // namespace lawq::cli
