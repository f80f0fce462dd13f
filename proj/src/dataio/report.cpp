#include "lawq/dataio/report.hpp"

#include <algorithm>
#include <map>

#include "lawq/error.hpp"
#include "lawq/format.hpp"

namespace lawq::io {

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string metrics_csv(std::span<const nn::MetricsRow> rows, std::size_t layers) {
    std::string out = "epoch,split,loss,error_rate";
    for (std::size_t l = 0; l < layers; ++l) out += ",alpha_l" + std::to_string(l + 1);
    out += ",wall_seconds\n";
    for (const nn::MetricsRow& row : rows) {
        out += std::to_string(row.epoch) + ',' + row.split + ',' + format_double(row.loss) + ',' +
               format_double(row.error_rate);
        for (std::size_t l = 0; l < layers; ++l) {
            out += ',';
            if (l < row.alpha.size()) out += optional_cell(row.alpha[l]);
        }
        out += ',' + format_double(row.wall_seconds) + '\n';
    }
    return out;
}

std::string trajectory_csv(std::span<const nn::StepRecord> records) {
    std::string out = "step,epoch,layer,alpha,beta,iterations,converged,degenerate\n";
    for (const nn::StepRecord& r : records) {
        out += std::to_string(r.step) + ',' + std::to_string(r.epoch) + ',' + std::to_string(r.layer + 1) + ',' +
               optional_cell(r.alpha) + ',' + optional_cell(r.beta) + ',' + std::to_string(r.iterations) + ',' +
               (r.converged ? '1' : '0') + ',' + (r.degenerate ? '1' : '0') + '\n';
    }
    return out;
}

std::vector<HistogramRow> export_histogram(std::span<const double> w, std::size_t bins) {
    if (bins == 0) fail(ErrorCode::InvalidArgument, "histogram needs at least one bin");
    if (w.empty()) fail(ErrorCode::InvalidArgument, "histogram of an empty weight vector");
    const auto [lo_it, hi_it] = std::minmax_element(w.begin(), w.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<HistogramRow> rows(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        rows[b].left = lo + width * static_cast<double>(b);
        rows[b].right = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
    }
    for (double x : w) {
        std::size_t b = bins - 1;
        if (width > 0.0 && x < hi) {
            b = std::min(bins - 1, static_cast<std::size_t>((x - lo) / width));
            // Floating-point edges: keep x inside [left, right).
            while (b > 0 && x < rows[b].left) --b;
            while (b + 1 < bins && x >= rows[b + 1].left) ++b;
        }
        ++rows[b].count;
    }
    return rows;
}

std::vector<HistogramRow> export_histogram(const QuantizedLayer& layer) {
    std::map<double, std::size_t> counts;
    for (std::size_t i = 0; i < layer.codes.size(); ++i) ++counts[layer.value_at(i)];
    std::vector<HistogramRow> rows;
    rows.reserve(counts.size());
    for (const auto& [value, count] : counts) rows.push_back({value, value, count});
    return rows;
}

std::string histogram_csv(std::span<const HistogramRow> rows) {
    std::string out = "bin_left,bin_right,count\n";
    for (const HistogramRow& r : rows) {
        out += format_double(r.left) + ',' + format_double(r.right) + ',' + std::to_string(r.count) + '\n';
    }
    return out;
}

}  // namespace lawq::io
