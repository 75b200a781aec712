#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "adagan/sample.hpp"

namespace adagan {

// Gaussian product-kernel density estimate with a single bandwidth.
class KdeModel {
  public:
    KdeModel(Points anchors, double bandwidth)
        : anchors_(std::move(anchors)), bandwidth_(bandwidth) {
        if (anchors_.rows() == 0) throw std::invalid_argument("kde: no anchors");
        if (!(bandwidth_ > 0.0)) throw std::invalid_argument("kde: bandwidth must be positive");
        const double d = static_cast<double>(anchors_.cols());
        log_norm_ = -std::log(static_cast<double>(anchors_.rows())) - d * std::log(bandwidth_) -
                    0.5 * d * std::log(2.0 * std::numbers::pi);
    }

    Eigen::Index dim() const { return anchors_.cols(); }
    double bandwidth() const { return bandwidth_; }
    const Points& anchors() const { return anchors_; }

    double log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const {
        if (x.size() != dim()) throw std::invalid_argument("kde: dimension mismatch");
        const double inv2h2 = 0.5 / (bandwidth_ * bandwidth_);
        double mx = -std::numeric_limits<double>::infinity();
        Eigen::VectorXd e(anchors_.rows());
        for (Eigen::Index j = 0; j < anchors_.rows(); ++j) {
            e[j] = -(x.transpose() - anchors_.row(j)).squaredNorm() * inv2h2;
            mx = std::max(mx, e[j]);
        }
        double acc = 0.0;
        for (Eigen::Index j = 0; j < anchors_.rows(); ++j) acc += std::exp(e[j] - mx);
        return log_norm_ + mx + std::log(acc);
    }

    Eigen::VectorXd log_density_batch(const Points& xs) const {
        Eigen::VectorXd out(xs.rows());
        for (Eigen::Index i = 0; i < xs.rows(); ++i) out[i] = log_density(xs.row(i));
        return out;
    }

    // anchor + bandwidth * standard normal
    Points sample(Eigen::Index n, Rng& rng) const {
        Points out(n, dim());
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index a = static_cast<Eigen::Index>(rng.uniform_index(
                static_cast<std::size_t>(anchors_.rows())));
            for (Eigen::Index j = 0; j < dim(); ++j)
                out(i, j) = anchors_(a, j) + bandwidth_ * rng.normal();
        }
        return out;
    }

  private:
    Points anchors_;
    double bandwidth_;
    double log_norm_;
};

// Log-spaced grid spanning [0.01, 2] x (average per-dimension std).
inline std::vector<double> default_bandwidth_grid(const Points& points, int size = 20) {
    const Eigen::Index n = points.rows();
    const Eigen::RowVectorXd mean = points.colwise().mean();
    double var = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) var += (points.row(i) - mean).squaredNorm();
    var /= std::max<Eigen::Index>(n - 1, 1) * points.cols();
    const double scale = std::max(std::sqrt(var), 1e-6);
    std::vector<double> grid(size);
    const double lo = std::log(0.01 * scale), hi = std::log(2.0 * scale);
    for (int i = 0; i < size; ++i)
        grid[i] = std::exp(lo + (hi - lo) * i / static_cast<double>(size - 1));
    return grid;
}

// Bandwidth chosen to maximize mean held-out log density over `folds`
// cross-validation folds; ties break toward the larger bandwidth.
inline KdeModel kde_fit(const Points& points, const std::vector<double>& bandwidth_grid,
                        int folds, Rng& rng) {
    const Eigen::Index n = points.rows();
    if (folds < 2) throw std::invalid_argument("kde_fit: folds must be >= 2");
    if (n < folds)
        throw std::invalid_argument("kde_fit: needs at least `folds` points to cross-validate");
    if (bandwidth_grid.empty()) throw std::invalid_argument("kde_fit: empty bandwidth grid");
    for (double b : bandwidth_grid)
        if (!(b > 0.0)) throw std::invalid_argument("kde_fit: bandwidths must be positive");

    // Exact duplicates stay in the same fold: a held-out twin among the
    // anchors would hand arbitrarily small bandwidths a perfect score.
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index c = 0; c < points.cols(); ++c) {
            if (points(a, c) != points(b, c)) return points(a, c) < points(b, c);
        }
        return false;
    });
    std::vector<std::vector<Eigen::Index>> groups;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i > 0 && points.row(order[i]) == points.row(order[i - 1]))
            groups.back().push_back(order[i]);
        else
            groups.push_back({order[i]});
    }
    rng.shuffle(groups);
    std::vector<int> fold_of(n);
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (Eigen::Index idx : groups[g]) fold_of[static_cast<std::size_t>(idx)] =
            static_cast<int>(g % static_cast<std::size_t>(folds));

    // scanning ascending with >= breaks score ties toward the larger bandwidth
    std::vector<double> grid = bandwidth_grid;
    std::sort(grid.begin(), grid.end());

    double best_score = -std::numeric_limits<double>::infinity();
    double best_bandwidth = -1.0;
    for (double bw : grid) {
        double total = 0.0;
        for (int f = 0; f < folds; ++f) {
            Eigen::Index held = 0, kept = 0;
            for (Eigen::Index i = 0; i < n; ++i) ((fold_of[i] == f) ? held : kept)++;
            if (held == 0 || kept == 0) continue;
            Points train(kept, points.cols());
            Points test(held, points.cols());
            Eigen::Index ti = 0, hi = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (fold_of[i] == f)
                    test.row(hi++) = points.row(i);
                else
                    train.row(ti++) = points.row(i);
            }
            const KdeModel model(std::move(train), bw);
            total += model.log_density_batch(test).sum();
        }
        const double score = total / static_cast<double>(n);
        if (score >= best_score && std::isfinite(score)) {
            best_score = score;
            best_bandwidth = bw;
        }
    }
    if (best_bandwidth < 0.0)
        throw std::runtime_error(
            "kde_fit: every candidate bandwidth scored -inf; widen the bandwidth grid");
    return KdeModel(points, best_bandwidth);
}

}  // namespace adagan
