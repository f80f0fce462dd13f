#include <algorithm>
#include <cmath>
#include <string>

#include "lawq/error.hpp"
#include "lawq/nn/network.hpp"

namespace lawq::nn {

namespace {

void check_labels(const Matrix& scores, std::span<const int> labels) {
    if (static_cast<std::size_t>(scores.rows()) != labels.size()) {
        fail(ErrorCode::ShapeMismatch, "scores have " + std::to_string(scores.rows()) + " rows, labels " +
                                           std::to_string(labels.size()));
    }
    for (int y : labels) {
        if (y < 0 || y >= scores.cols()) {
            fail(ErrorCode::InvalidLabel, "label " + std::to_string(y) + " outside [0, " +
                                              std::to_string(scores.cols()) + ")");
        }
    }
}

std::size_t count_errors(const Matrix& scores, std::span<const int> labels) {
    std::size_t errors = 0;
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        Eigen::Index best = 0;
        scores.row(i).maxCoeff(&best);
        if (best != labels[static_cast<std::size_t>(i)]) ++errors;
    }
    return errors;
}

}  // namespace

LossResult square_hinge_loss(const Matrix& scores, std::span<const int> labels) {
    check_labels(scores, labels);
    const double n = static_cast<double>(scores.rows());
    LossResult out;
    out.grad = Matrix::Zero(scores.rows(), scores.cols());
    double total = 0.0;
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        for (Eigen::Index c = 0; c < scores.cols(); ++c) {
            const double y = c == labels[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
            const double margin = std::max(0.0, 1.0 - y * scores(i, c));
            total += margin * margin;
            out.grad(i, c) = -2.0 * y * margin / n;
        }
    }
    out.loss = total / n;
    out.errors = count_errors(scores, labels);
    return out;
}

LossResult softmax_cross_entropy(const Matrix& scores, std::span<const int> labels) {
    check_labels(scores, labels);
    const double n = static_cast<double>(scores.rows());
    LossResult out;
    out.grad.resize(scores.rows(), scores.cols());
    double total = 0.0;
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double top = scores.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (scores.row(i).array() - top).exp();
        const double z = e.sum();
        const int y = labels[static_cast<std::size_t>(i)];
        total += std::log(z) - (scores(i, y) - top);
        out.grad.row(i) = e / (z * n);
        out.grad(i, y) -= 1.0 / n;
    }
    out.loss = total / n;
    out.errors = count_errors(scores, labels);
    return out;
}

LossResult compute_loss(LossKind kind, const Matrix& scores, std::span<const int> labels) {
    return kind == LossKind::SquareHinge ? square_hinge_loss(scores, labels) : softmax_cross_entropy(scores, labels);
}

}  // namespace lawq::nn
