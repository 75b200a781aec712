#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "adagan/divergence.hpp"
#include "adagan/kde.hpp"
#include "adagan/mixture.hpp"

namespace adagan {

// Estimates D(x) = dP_d / (dP_d + dP_g), the probability that a point came
// from the data rather than the current model. Outputs are clamped into
// (0, 1) so the downstream ratio map stays finite.
class Discriminator {
  public:
    virtual ~Discriminator() = default;
    virtual double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;

    Eigen::VectorXd predict_batch(const Points& xs) const {
        Eigen::VectorXd out(xs.rows());
        for (Eigen::Index i = 0; i < xs.rows(); ++i) out[i] = predict(xs.row(i));
        return out;
    }

  protected:
    static double clamp(double d) {
        return std::min(1.0 - kDiscriminatorClamp, std::max(kDiscriminatorClamp, d));
    }
};

using DiscriminatorPtr = std::shared_ptr<const Discriminator>;

// Density-ratio discriminator: KDE estimate of the data density against the
// analytic model density, combined as 1 / (1 + p_g / p_d).
class OracleDiscriminator final : public Discriminator {
  public:
    OracleDiscriminator(KdeModel data_density, GeneratorPtr model)
        : data_density_(std::move(data_density)), model_(std::move(model)) {
        if (!model_) throw std::invalid_argument("oracle discriminator: null model");
    }

    double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
        const double ld = data_density_.log_density(x);
        const double lg = model_->log_density(x);
        if (!std::isfinite(ld) && !std::isfinite(lg)) return 0.5;  // no signal either way
        if (!std::isfinite(lg)) return clamp(1.0);
        if (!std::isfinite(ld)) return clamp(0.0);
        return clamp(1.0 / (1.0 + std::exp(lg - ld)));
    }

    const KdeModel& data_density() const { return data_density_; }

  private:
    KdeModel data_density_;
    GeneratorPtr model_;
};

// Regularized logistic regression on degree-2 polynomial features, trained
// by IRLS on balanced data-vs-model samples. Quadratic logits capture
// Gaussian log-ratios exactly, which is all the toy targets need.
class LogisticDiscriminator final : public Discriminator {
  public:
    LogisticDiscriminator(Eigen::VectorXd coef, Eigen::VectorXd feature_mean,
                          Eigen::VectorXd feature_scale, bool converged)
        : coef_(std::move(coef)),
          mean_(std::move(feature_mean)),
          scale_(std::move(feature_scale)),
          converged_(converged) {}

    bool converged() const { return converged_; }

    static Eigen::VectorXd features(const Eigen::Ref<const Eigen::VectorXd>& x) {
        const Eigen::Index d = x.size();
        Eigen::VectorXd phi(1 + d + d * (d + 1) / 2);
        Eigen::Index k = 0;
        phi[k++] = 1.0;
        for (Eigen::Index i = 0; i < d; ++i) phi[k++] = x[i];
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = i; j < d; ++j) phi[k++] = x[i] * x[j];
        return phi;
    }

    double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
        Eigen::VectorXd phi = features(x);
        for (Eigen::Index i = 1; i < phi.size(); ++i) phi[i] = (phi[i] - mean_[i]) / scale_[i];
        const double z = coef_.dot(phi);
        return clamp(1.0 / (1.0 + std::exp(-z)));
    }

  private:
    Eigen::VectorXd coef_;
    Eigen::VectorXd mean_;
    Eigen::VectorXd scale_;
    bool converged_;
};

enum class DiscriminatorMode { Oracle, Classifier };

struct DiscriminatorConfig {
    DiscriminatorMode mode = DiscriminatorMode::Oracle;
    int kde_anchor_cap = 2000;  // KDE cost grows with anchors; subsample beyond this
    int kde_grid_size = 20;
    int kde_folds = 5;
    double l2_penalty = 1e-3;
    int max_irls_iters = 200;
    double grad_tol = 1e-6;
};

namespace detail {

inline Points subsample_rows(const Points& pts, Eigen::Index cap, Rng& rng) {
    if (pts.rows() <= cap) return pts;
    std::vector<Eigen::Index> idx(pts.rows());
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    Points out(cap, pts.cols());
    for (Eigen::Index i = 0; i < cap; ++i) out.row(i) = pts.row(idx[i]);
    return out;
}

inline LogisticDiscriminator fit_logistic(const Points& data, const Points& model_samples,
                                          const DiscriminatorConfig& cfg) {
    const Eigen::Index n = data.rows() + model_samples.rows();
    const Eigen::Index p = LogisticDiscriminator::features(data.row(0)).size();
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        X.row(i) = LogisticDiscriminator::features(data.row(i)).transpose();
        y[i] = 1.0;
    }
    for (Eigen::Index i = 0; i < model_samples.rows(); ++i) {
        X.row(data.rows() + i) =
            LogisticDiscriminator::features(model_samples.row(i)).transpose();
        y[data.rows() + i] = 0.0;
    }

    // standardize the non-intercept columns for conditioning
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(p);
    for (Eigen::Index j = 1; j < p; ++j) {
        mean[j] = X.col(j).mean();
        const double sd = std::sqrt((X.col(j).array() - mean[j]).square().mean());
        scale[j] = sd > 1e-12 ? sd : 1.0;
        X.col(j) = (X.col(j).array() - mean[j]) / scale[j];
    }

    // Newton steps on the mean penalized log-likelihood
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd best_w = w;
    double best_grad = std::numeric_limits<double>::infinity();
    bool converged = false;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int iter = 0; iter < cfg.max_irls_iters; ++iter) {
        const Eigen::VectorXd z = X * w;
        const Eigen::VectorXd mu = (1.0 / (1.0 + (-z.array()).exp())).matrix();
        Eigen::VectorXd grad = X.transpose() * (y - mu) * inv_n;
        for (Eigen::Index j = 1; j < p; ++j) grad[j] -= cfg.l2_penalty * w[j];
        const double gnorm = grad.norm();
        if (gnorm < best_grad) {
            best_grad = gnorm;
            best_w = w;
        }
        if (gnorm <= cfg.grad_tol) {
            converged = true;
            break;
        }
        const Eigen::VectorXd s = (mu.array() * (1.0 - mu.array())).matrix() * inv_n;
        Eigen::MatrixXd hess = X.transpose() * s.asDiagonal() * X;
        for (Eigen::Index j = 1; j < p; ++j) hess(j, j) += cfg.l2_penalty;
        hess.diagonal().array() += 1e-12;
        w += hess.ldlt().solve(grad);
    }
    return LogisticDiscriminator(std::move(best_w), std::move(mean), std::move(scale), converged);
}

}  // namespace detail

// Discriminator between the (unweighted) data and the current model: either
// the density-ratio oracle or a trained probabilistic classifier.
inline DiscriminatorPtr fit_discriminator(const WeightedSample& data, const GeneratorPtr& model,
                                          const DiscriminatorConfig& cfg, Rng& rng) {
    if (!model) throw std::invalid_argument("fit_discriminator: null model");
    if (cfg.mode == DiscriminatorMode::Oracle) {
        const Points anchors = detail::subsample_rows(data.points, cfg.kde_anchor_cap, rng);
        KdeModel kde = kde_fit(anchors, default_bandwidth_grid(anchors, cfg.kde_grid_size),
                               cfg.kde_folds, rng);
        return std::make_shared<OracleDiscriminator>(std::move(kde), model);
    }
    const Points model_samples = model->sample(data.size(), rng);
    return std::make_shared<LogisticDiscriminator>(
        detail::fit_logistic(data.points, model_samples, cfg));
}

}  // namespace adagan
