#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "adagan/mixture.hpp"

namespace adagan {

struct EmFit {
    GeneratorPtr model;                // GeneratorMixture of Gaussians
    std::vector<double> loglik_path;   // weighted log-likelihood per iteration, nondecreasing
    int reseeded_components = 0;
};

// Weighted-data EM for a k-component Gaussian mixture: every point's
// responsibility is scaled by its sample weight, so the fit maximizes
// sum_i w_i log p(x_i). Best of `restarts` seeded initializations wins.
inline EmFit fit_gaussian_mixture_em(const WeightedSample& sample, int k, int restarts, Rng& rng,
                                     int max_iters = 200, double rel_tol = 1e-8) {
    if (k < 1) throw std::invalid_argument("em: k must be >= 1");
    if (restarts < 1) throw std::invalid_argument("em: restarts must be >= 1");
    const Eigen::Index n = sample.size();
    const Eigen::Index d = sample.dim();
    if (sample.positive_weight_count() < d + 1)
        throw FitError("em: needs at least dim+1 points with positive weight");

    // global weighted moments, reused for initialization and re-seeding
    const GaussianGenerator global = fit_gaussian(sample);
    std::vector<double> w(sample.weights.data(), sample.weights.data() + n);
    Eigen::Index heaviest = 0;
    sample.weights.maxCoeff(&heaviest);

    EmFit best;
    double best_ll = -std::numeric_limits<double>::infinity();

    for (int attempt = 0; attempt < restarts; ++attempt) {
        std::vector<Eigen::VectorXd> means(k);
        std::vector<Eigen::MatrixXd> covs(k, global.covariance());
        std::vector<double> pis(k, 1.0 / k);
        for (int j = 0; j < k; ++j)
            means[j] = sample.points.row(static_cast<Eigen::Index>(sample_categorical(rng, w)))
                           .transpose();

        std::vector<double> path;
        int reseeds = 0;
        Eigen::MatrixXd resp(n, k);
        double prev_ll = -std::numeric_limits<double>::infinity();

        for (int iter = 0; iter < max_iters; ++iter) {
            std::vector<GaussianGenerator> comps;
            comps.reserve(k);
            for (int j = 0; j < k; ++j) comps.emplace_back(means[j], covs[j]);

            // E-step in the log domain
            double ll = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                double mx = -std::numeric_limits<double>::infinity();
                for (int j = 0; j < k; ++j) {
                    resp(i, j) = std::log(pis[j]) + comps[j].log_density(sample.points.row(i));
                    mx = std::max(mx, resp(i, j));
                }
                double z = 0.0;
                for (int j = 0; j < k; ++j) z += std::exp(resp(i, j) - mx);
                const double log_z = mx + std::log(z);
                for (int j = 0; j < k; ++j) resp(i, j) = std::exp(resp(i, j) - log_z);
                ll += sample.weights[i] * log_z;
            }
            path.push_back(ll);
            if (std::isfinite(prev_ll) && ll - prev_ll < rel_tol * (std::abs(prev_ll) + 1.0)) break;
            prev_ll = ll;

            // M-step with weight-scaled responsibilities
            for (int j = 0; j < k; ++j) {
                double mass = 0.0;
                Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double r = sample.weights[i] * resp(i, j);
                    mass += r;
                    mu += r * sample.points.row(i).transpose();
                }
                if (mass < 1e-12) {
                    // dead component: restart it on the heaviest point
                    means[j] = sample.points.row(heaviest).transpose();
                    covs[j] = global.covariance();
                    pis[j] = 1e-3;
                    ++reseeds;
                    continue;
                }
                mu /= mass;
                Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double r = sample.weights[i] * resp(i, j);
                    if (r == 0.0) continue;
                    const Eigen::VectorXd c = sample.points.row(i).transpose() - mu;
                    cov += r * (c * c.transpose());
                }
                cov /= mass;
                detail::regularize_covariance(cov);
                means[j] = std::move(mu);
                covs[j] = std::move(cov);
                pis[j] = mass;
            }
            double pi_sum = 0.0;
            for (double p : pis) pi_sum += p;
            for (double& p : pis) p /= pi_sum;
        }

        if (!path.empty() && path.back() > best_ll) {
            best_ll = path.back();
            std::vector<GeneratorPtr> comps;
            for (int j = 0; j < k; ++j)
                comps.push_back(std::make_shared<GaussianGenerator>(means[j], covs[j]));
            best.model = std::make_shared<GeneratorMixture>(std::move(comps), pis);
            best.loglik_path = std::move(path);
            best.reseeded_components = reseeds;
        }
    }
    if (!best.model) throw FitError("em: no restart produced a usable fit");
    return best;
}

}  // namespace adagan
