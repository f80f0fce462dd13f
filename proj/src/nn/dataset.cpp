#include <cmath>
#include <numeric>
#include <string>

#include "lawq/error.hpp"
#include "lawq/nn/train.hpp"

namespace lawq::nn {

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.classes = classes;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
    out.y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.x.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
        out.y[i] = y[rows[i]];
    }
    return out;
}

DataSplits split_validation(Dataset train, Dataset test, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0)) fail(ErrorCode::BadValue, "validation fraction must lie in [0, 1)");
    DataSplits out;
    out.test = std::move(test);
    const auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size())));
    if (held == 0) {
        out.train = std::move(train);
        out.val.classes = out.train.classes;
        out.val.x.resize(0, out.train.x.cols());
        return out;
    }
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order.begin(), order.end());
    const std::span<const std::size_t> all(order);
    out.val = train.subset(all.first(held));
    out.train = train.subset(all.subspan(held));
    return out;
}

Dataset make_separable_2d(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Dataset out;
    out.classes = 2;
    out.x.resize(static_cast<Eigen::Index>(n), 2);
    out.y.resize(n);
    for (std::size_t i = 0; i < n;) {
        const double a = rng.uniform(-1.0, 1.0);
        const double b = rng.uniform(-1.0, 1.0);
        if (std::fabs(a + b) < 0.1) continue;
        out.x(static_cast<Eigen::Index>(i), 0) = a;
        out.x(static_cast<Eigen::Index>(i), 1) = b;
        out.y[i] = a + b > 0.0 ? 1 : 0;
        ++i;
    }
    return out;
}

Dataset make_synthetic(std::size_t n, std::size_t features, std::size_t classes, std::uint64_t seed) {
    if (features < 1 || classes < 2) fail(ErrorCode::BadValue, "synthetic data needs features >= 1 and classes >= 2");
    Rng rng(seed);
    Matrix centers(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(features));
    for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = rng.uniform(-1.0, 1.0);
    Dataset out;
    out.classes = classes;
    out.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(features));
    out.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<int>(rng.below(classes));
        out.y[i] = c;
        for (std::size_t f = 0; f < features; ++f) {
            out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) =
                centers(c, static_cast<Eigen::Index>(f)) + rng.uniform(-0.5, 0.5);
        }
    }
    return out;
}

}  // namespace lawq::nn
