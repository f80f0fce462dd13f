#include <string>

#include "lawq/error.hpp"
#include "lawq/nn/network.hpp"

namespace lawq::nn {

BatchNormParams BatchNormParams::identity(std::size_t features) {
    const auto n = static_cast<Eigen::Index>(features);
    return {Vector::Ones(n), Vector::Zero(n), Vector::Zero(n), Vector::Ones(n)};
}

Matrix batch_norm_forward(const Matrix& x, BatchNormParams& params, bool training, BatchNormCache* cache) {
    const Eigen::Index batch = x.rows();
    const Eigen::Index features = x.cols();
    if (params.gamma.size() != features) {
        fail(ErrorCode::ShapeMismatch, "batch norm has " + std::to_string(params.gamma.size()) +
                                           " features, input has " + std::to_string(features));
    }
    Vector mean;
    Vector var;
    if (training) {
        if (batch < 2) fail(ErrorCode::DegenerateBatch, "batch norm needs at least 2 samples in training mode");
        mean = x.colwise().mean().transpose();
        var = (x.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
        params.running_mean = kBatchNormMomentum * params.running_mean + (1.0 - kBatchNormMomentum) * mean;
        params.running_var = kBatchNormMomentum * params.running_var + (1.0 - kBatchNormMomentum) * var;
    } else {
        mean = params.running_mean;
        var = params.running_var;
    }
    const Vector inv_std = (var.array() + kBatchNormEpsilon).rsqrt().matrix();
    Matrix x_hat = (x.rowwise() - mean.transpose()).array().rowwise() * inv_std.transpose().array();
    Matrix y = (x_hat.array().rowwise() * params.gamma.transpose().array()).rowwise() + params.beta.transpose().array();
    if (cache) {
        cache->x_hat = std::move(x_hat);
        cache->inv_std = inv_std;
    }
    return y;
}

BatchNormGrads batch_norm_backward(const Matrix& dy, const BatchNormParams& params, const BatchNormCache& cache) {
    const double n = static_cast<double>(dy.rows());
    BatchNormGrads out;
    out.dbeta = dy.colwise().sum().transpose();
    out.dgamma = dy.cwiseProduct(cache.x_hat).colwise().sum().transpose();
    const Matrix dx_hat = dy.array().rowwise() * params.gamma.transpose().array();
    const Eigen::RowVectorXd sum_dx_hat = dx_hat.colwise().sum();
    const Eigen::RowVectorXd sum_dx_hat_x_hat = dx_hat.cwiseProduct(cache.x_hat).colwise().sum();
    Matrix centered = (n * dx_hat).rowwise() - sum_dx_hat;
    centered -= (cache.x_hat.array().rowwise() * sum_dx_hat_x_hat.array()).matrix();
    out.dx = centered.array().rowwise() * (cache.inv_std.transpose().array() / n);
    return out;
}

}  // namespace lawq::nn
