#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "adagan/sample.hpp"

namespace adagan {

using LogDensityFn = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

constexpr double kLogDensityFloor = -1e10;  // keeps medians finite and sortable

// Coverage C: the probability mass of the data lying inside the model's 95%
// density region. The threshold is the empirical 5th percentile of the model
// density over its own samples, so the metric depends only on the density
// ordering.
inline double coverage_c(const LogDensityFn& model_log_density, const Points& model_samples,
                         const Points& data_samples) {
    if (model_samples.rows() < 100)
        throw std::invalid_argument("coverage_c: needs >= 100 model samples");
    if (data_samples.rows() == 0) throw std::invalid_argument("coverage_c: empty data");

    std::vector<double> level(model_samples.rows());
    for (Eigen::Index i = 0; i < model_samples.rows(); ++i)
        level[static_cast<std::size_t>(i)] = model_log_density(model_samples.row(i));
    std::sort(level.begin(), level.end());
    const std::size_t k =
        std::max<std::size_t>(1, static_cast<std::size_t>(0.05 * level.size()));
    const double threshold = level[k - 1];

    // >= so that flat densities (every sample at the threshold) count as covered
    Eigen::Index covered = 0;
    for (Eigen::Index i = 0; i < data_samples.rows(); ++i)
        if (model_log_density(data_samples.row(i)) >= threshold) ++covered;
    return static_cast<double>(covered) / static_cast<double>(data_samples.rows());
}

// L: mean log density of the data under the model, with the floor applied
// pointwise so missing support yields a large negative value instead of -inf.
inline double log_likelihood_l(const LogDensityFn& model_log_density, const Points& data_samples) {
    if (data_samples.rows() == 0) throw std::invalid_argument("log_likelihood_l: empty data");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < data_samples.rows(); ++i)
        acc += std::max(model_log_density(data_samples.row(i)), kLogDensityFloor);
    return acc / static_cast<double>(data_samples.rows());
}

}  // namespace adagan
