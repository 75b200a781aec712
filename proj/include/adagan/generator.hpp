#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "adagan/rng.hpp"
#include "adagan/sample.hpp"

namespace adagan {

class FitError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A weak learner's output: something that can be sampled and that exposes an
// analytic log density. Immutable after fitting.
class Generator {
  public:
    virtual ~Generator() = default;

    virtual Eigen::Index dim() const = 0;
    virtual Points sample(Eigen::Index n, Rng& rng) const = 0;
    virtual double log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
    virtual nlohmann::ordered_json to_json() const = 0;

    Eigen::VectorXd log_density_batch(const Points& xs) const {
        Eigen::VectorXd out(xs.rows());
        for (Eigen::Index i = 0; i < xs.rows(); ++i) out[i] = log_density(xs.row(i));
        return out;
    }
};

using GeneratorPtr = std::shared_ptr<const Generator>;

class GaussianGenerator final : public Generator {
  public:
    GaussianGenerator(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
        : mean_(std::move(mean)), cov_(std::move(covariance)) {
        if (cov_.rows() != cov_.cols() || cov_.rows() != mean_.size())
            throw std::invalid_argument("gaussian: shape mismatch");
        llt_.compute(cov_);
        if (llt_.info() != Eigen::Success)
            throw FitError("gaussian: covariance not positive definite");
        double log_det = 0.0;
        for (Eigen::Index i = 0; i < cov_.rows(); ++i)
            log_det += 2.0 * std::log(llt_.matrixL()(i, i));
        log_norm_ = -0.5 * (static_cast<double>(mean_.size()) * std::log(2.0 * std::numbers::pi) +
                            log_det);
    }

    Eigen::Index dim() const override { return mean_.size(); }

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }

    Points sample(Eigen::Index n, Rng& rng) const override {
        Points out(n, dim());
        Eigen::VectorXd z(dim());
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < dim(); ++j) z[j] = rng.normal();
            out.row(i) = (mean_ + llt_.matrixL() * z).transpose();
        }
        return out;
    }

    double log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
        if (x.size() != dim()) throw std::invalid_argument("gaussian: dimension mismatch");
        const Eigen::VectorXd centered = x - mean_;
        const Eigen::VectorXd w = llt_.matrixL().solve(centered);
        return log_norm_ - 0.5 * w.squaredNorm();
    }

    nlohmann::ordered_json to_json() const override {
        nlohmann::ordered_json j;
        j["type"] = "gaussian";
        j["mean"] = std::vector<double>(mean_.data(), mean_.data() + mean_.size());
        auto rows = nlohmann::ordered_json::array();
        for (Eigen::Index r = 0; r < cov_.rows(); ++r) {
            std::vector<double> row(cov_.cols());
            for (Eigen::Index c = 0; c < cov_.cols(); ++c) row[c] = cov_(r, c);
            rows.push_back(row);
        }
        j["cov"] = rows;
        return j;
    }

  private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double log_norm_ = 0.0;
};

namespace detail {

// Ridge keeping weighted fits on few effective points invertible.
inline void regularize_covariance(Eigen::MatrixXd& cov) {
    const double tr = cov.trace();
    const double d = static_cast<double>(cov.rows());
    const double ridge = tr > 0.0 ? 1e-6 * tr / d : 1e-6;
    cov += ridge * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
}

}  // namespace detail

// Full-covariance Gaussian by weighted maximum likelihood. The ridge keeps
// fits on as little as one effective point well defined.
inline GaussianGenerator fit_gaussian(const WeightedSample& sample) {
    const Eigen::Index d = sample.dim();
    if (sample.positive_weight_count() < 1)
        throw FitError("fit_gaussian: no points with positive weight");

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < sample.size(); ++i)
        mean += sample.weights[i] * sample.points.row(i).transpose();

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < sample.size(); ++i) {
        if (sample.weights[i] == 0.0) continue;
        const Eigen::VectorXd c = sample.points.row(i).transpose() - mean;
        cov += sample.weights[i] * (c * c.transpose());
    }
    detail::regularize_covariance(cov);
    return GaussianGenerator(std::move(mean), std::move(cov));
}

}  // namespace adagan
