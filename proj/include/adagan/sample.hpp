#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "adagan/rng.hpp"

namespace adagan {

using Points = Eigen::MatrixXd;  // one point per row

// Data points with nonnegative weights summing to one; the empirical side
// of the boosting loop.
struct WeightedSample {
    Points points;
    Eigen::VectorXd weights;

    WeightedSample(Points pts, Eigen::VectorXd w) : points(std::move(pts)), weights(std::move(w)) {
        if (points.rows() == 0) throw std::invalid_argument("weighted sample: no points");
        if (weights.size() != points.rows())
            throw std::invalid_argument("weighted sample: weight/point count mismatch");
        double sum = 0.0;
        for (Eigen::Index i = 0; i < weights.size(); ++i) {
            if (std::isnan(weights[i]) || weights[i] < 0.0)
                throw std::invalid_argument("weighted sample: invalid weight");
            sum += weights[i];
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("weighted sample: weights must sum to 1");
    }

    static WeightedSample uniform(Points pts) {
        const Eigen::Index n = pts.rows();
        return WeightedSample(std::move(pts),
                              Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
    }

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }

    Eigen::Index positive_weight_count() const {
        Eigen::Index c = 0;
        for (Eigen::Index i = 0; i < weights.size(); ++i)
            if (weights[i] > 0.0) ++c;
        return c;
    }
};

// Importance resampling: n draws with replacement proportional to the
// weights, returned with uniform weights.
inline WeightedSample resample(const WeightedSample& sample, Eigen::Index n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("resample: n must be positive");
    std::vector<double> w(sample.weights.data(), sample.weights.data() + sample.weights.size());
    Points out(n, sample.dim());
    for (Eigen::Index i = 0; i < n; ++i)
        out.row(i) = sample.points.row(static_cast<Eigen::Index>(sample_categorical(rng, w)));
    return WeightedSample::uniform(std::move(out));
}

}  // namespace adagan
