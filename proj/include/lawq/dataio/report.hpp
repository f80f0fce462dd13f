#pragma once

#include <span>
#include <string>
#include <vector>

#include "lawq/nn/train.hpp"
#include "lawq/quantizers.hpp"

namespace lawq::io {

// epoch,split,loss,error_rate,alpha_l1,...,alpha_lL,wall_seconds
std::string metrics_csv(std::span<const nn::MetricsRow> rows, std::size_t layers);

// step,epoch,layer,alpha,beta,iterations,converged,degenerate
std::string trajectory_csv(std::span<const nn::StepRecord> records);

struct HistogramRow {
    double left = 0.0;
    double right = 0.0;
    std::size_t count = 0;
};

// Uniform bins over [min(w), max(w)]; each bin is [left, right) except the
// last, which also takes max(w).
std::vector<HistogramRow> export_histogram(std::span<const double> w, std::size_t bins);

// One row per distinct reconstructed value (left = right = value).
std::vector<HistogramRow> export_histogram(const QuantizedLayer& layer);

std::string histogram_csv(std::span<const HistogramRow> rows);

}  // namespace lawq::io
