#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adagan/discriminator.hpp"
#include "adagan/em.hpp"
#include "adagan/metrics.hpp"
#include "adagan/mixture.hpp"
#include "adagan/weights.hpp"

namespace adagan {

struct LearnerConfig {
    enum class Type { Gaussian, GaussianMixtureEm };

    Type type = Type::Gaussian;
    int k = 2;            // EM components
    int restarts = 3;     // EM restarts
    int em_iters = 100;
    bool resample_fit = false;  // importance-resample instead of direct weighting

    Eigen::Index min_fit_points(Eigen::Index dim) const {
        return std::max<Eigen::Index>(dim + 1, 10);
    }
};

inline GeneratorPtr fit_weak_learner(const WeightedSample& sample, const LearnerConfig& cfg,
                                     Rng& rng) {
    const WeightedSample* input = &sample;
    std::optional<WeightedSample> resampled;
    if (cfg.resample_fit) {
        resampled = resample(sample, sample.size(), rng);
        input = &*resampled;
    }
    switch (cfg.type) {
        case LearnerConfig::Type::Gaussian:
            return std::make_shared<GaussianGenerator>(fit_gaussian(*input));
        case LearnerConfig::Type::GaussianMixtureEm:
            return fit_gaussian_mixture_em(*input, cfg.k, cfg.restarts, rng, cfg.em_iters).model;
    }
    throw std::logic_error("fit_weak_learner: unknown learner type");
}

struct IterationRecord {
    int t = 0;
    double beta = 0.0;
    double lambda = 0.0;
    double weight_min = 0.0;
    double weight_max = 0.0;
    long weight_zero_count = 0;
    bool fallback = false;          // degenerate weights replaced by a top slice
    std::size_t component = 0;      // index of the component fitted this round
    std::vector<double> weights;    // full vector, kept only when requested
};

struct AdaganOptions {
    int T = 10;
    BetaSchedule schedule;
    LearnerConfig learner;
    DiscriminatorConfig discriminator;
    bool record_weights = false;
    GeneratorPtr initial_component;  // overrides the iteration-1 fit when set
};

struct AdaganRun {
    GeneratorMixture mixture;
    std::vector<IterationRecord> iterations;  // rounds t = 2..T

    // Mixture after the first t components, replaying the beta sequence.
    GeneratorMixture prefix_mixture(int t) const {
        const auto& comps = mixture.components();
        if (t < 1 || static_cast<std::size_t>(t) > comps.size())
            throw std::invalid_argument("prefix_mixture: t out of range");
        GeneratorMixture m = GeneratorMixture::single(comps[0]);
        for (int i = 2; i <= t; ++i)
            m = mixture_add_component(m, comps[static_cast<std::size_t>(i - 1)],
                                      iterations[static_cast<std::size_t>(i - 2)].beta);
        return m;
    }
};

// Aborted boosting run: carries the partial result alongside the cause.
class BoostingError : public std::runtime_error {
  public:
    BoostingError(const std::string& what, int failed_iteration,
                  std::shared_ptr<const AdaganRun> partial)
        : std::runtime_error(what + " (iteration " + std::to_string(failed_iteration) + ")"),
          failed_iteration_(failed_iteration),
          partial_(std::move(partial)) {}
    int failed_iteration() const { return failed_iteration_; }
    const AdaganRun& partial_run() const { return *partial_; }

  private:
    int failed_iteration_;
    std::shared_ptr<const AdaganRun> partial_;
};

// The boosting meta-algorithm: fit on uniform weights, then repeatedly
// discriminate data against the current mixture, reweight the training set
// toward what the mixture misses, fit the next weak component on those
// weights, and fold it in with the scheduled beta.
inline AdaganRun run_adagan(const Points& data, const AdaganOptions& opt, Rng& rng) {
    if (opt.T < 1) throw std::invalid_argument("run_adagan: T must be >= 1");
    if (data.rows() == 0) throw std::invalid_argument("run_adagan: empty data");
    const Eigen::Index n = data.rows();
    const Eigen::Index dim = data.cols();
    const WeightedSample uniform = WeightedSample::uniform(data);

    GeneratorPtr first = opt.initial_component;
    if (!first) first = fit_weak_learner(uniform, opt.learner, rng);
    AdaganRun run{GeneratorMixture::single(first), {}};

    // The data-side KDE never changes; fit it once and reuse it against
    // every intermediate mixture.
    std::optional<KdeModel> data_kde;
    if (opt.T > 1 && opt.discriminator.mode == DiscriminatorMode::Oracle) {
        const Points anchors =
            detail::subsample_rows(data, opt.discriminator.kde_anchor_cap, rng);
        data_kde = kde_fit(anchors, default_bandwidth_grid(anchors, opt.discriminator.kde_grid_size),
                           opt.discriminator.kde_folds, rng);
    }

    const std::vector<double> p(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
    for (int t = 2; t <= opt.T; ++t) {
        auto model = std::make_shared<GeneratorMixture>(run.mixture);
        DiscriminatorPtr disc;
        if (opt.discriminator.mode == DiscriminatorMode::Oracle)
            disc = std::make_shared<OracleDiscriminator>(*data_kde, model);
        else
            disc = fit_discriminator(uniform, model, opt.discriminator, rng);

        const Eigen::VectorXd d = disc->predict_batch(data);
        const std::vector<double> d_values(d.data(), d.data() + d.size());
        const double beta = opt.schedule.evaluate(t, d_values, p);
        auto upd = update_training_weights(d_values, p, beta);

        IterationRecord rec;
        rec.t = t;
        rec.beta = beta;
        rec.lambda = upd.lambda;
        rec.weight_min = *std::min_element(upd.weights.begin(), upd.weights.end());
        rec.weight_max = *std::max_element(upd.weights.begin(), upd.weights.end());
        rec.weight_zero_count =
            std::count_if(upd.weights.begin(), upd.weights.end(), [](double w) { return w == 0.0; });

        // aggressive beta can starve the learner; keep the run alive on the
        // heaviest slice and flag it
        const Eigen::Index positive = n - static_cast<Eigen::Index>(rec.weight_zero_count);
        if (positive < opt.learner.min_fit_points(dim)) {
            const Eigen::Index m = std::min<Eigen::Index>(n, opt.learner.min_fit_points(dim));
            std::vector<std::size_t> order(upd.weights.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return upd.weights[a] > upd.weights[b];
            });
            std::fill(upd.weights.begin(), upd.weights.end(), 0.0);
            for (Eigen::Index i = 0; i < m; ++i)
                upd.weights[order[static_cast<std::size_t>(i)]] = 1.0 / static_cast<double>(m);
            rec.fallback = true;
        }

        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) w[i] = upd.weights[static_cast<std::size_t>(i)];
        GeneratorPtr component;
        try {
            component = fit_weak_learner(WeightedSample(data, w), opt.learner, rng);
        } catch (const FitError& e) {
            throw BoostingError(e.what(), t, std::make_shared<AdaganRun>(std::move(run)));
        }
        run.mixture = mixture_add_component(run.mixture, component, beta);
        rec.component = run.mixture.component_count() - 1;
        if (opt.record_weights) rec.weights = std::move(upd.weights);
        run.iterations.push_back(std::move(rec));
    }
    return run;
}

enum class BaselineVariant { Vanilla, BestOfT, Ensemble, TopKLast, TopK };

struct BaselineOptions {
    BaselineVariant variant = BaselineVariant::Vanilla;
    int T = 1;
    double r = 0.5;  // kept fraction for the TopK variants
    LearnerConfig learner;
    DiscriminatorConfig discriminator;
    double validation_fraction = 0.2;  // BestOfT selection split
    Eigen::Index coverage_samples = 2000;
};

namespace detail {

inline GeneratorMixture baseline_prefix(BaselineVariant variant,
                                        const std::vector<GeneratorPtr>& components,
                                        const std::vector<double>& selection_scores, int t) {
    if (t < 1 || static_cast<std::size_t>(t) > components.size())
        throw std::invalid_argument("prefix_mixture: t out of range");
    switch (variant) {
        case BaselineVariant::Vanilla:
            return GeneratorMixture::single(components[0]);
        case BaselineVariant::Ensemble: {
            std::vector<GeneratorPtr> c(components.begin(), components.begin() + t);
            return GeneratorMixture(std::move(c),
                                    std::vector<double>(t, 1.0 / static_cast<double>(t)));
        }
        case BaselineVariant::BestOfT: {
            const auto it =
                std::max_element(selection_scores.begin(), selection_scores.begin() + t);
            return GeneratorMixture::single(
                components[static_cast<std::size_t>(it - selection_scores.begin())]);
        }
        case BaselineVariant::TopKLast:
        case BaselineVariant::TopK: {
            GeneratorMixture m = GeneratorMixture::single(components[0]);
            for (int i = 2; i <= t; ++i)
                m = mixture_add_component(m, components[static_cast<std::size_t>(i - 1)],
                                          1.0 / static_cast<double>(i));
            return m;
        }
    }
    throw std::logic_error("prefix_mixture: unknown variant");
}

}  // namespace detail

struct BaselineRun {
    BaselineVariant variant = BaselineVariant::Vanilla;
    GeneratorMixture mixture;
    std::vector<GeneratorPtr> components;   // fit order
    std::vector<double> selection_scores;   // BestOfT validation coverage per component

    GeneratorMixture prefix_mixture(int t) const {
        return detail::baseline_prefix(variant, components, selection_scores, t);
    }
};

// Reference algorithms the boosted mixture is benchmarked against.
inline BaselineRun run_baseline(const Points& data, const BaselineOptions& opt, Rng& rng) {
    if (opt.T < 1) throw std::invalid_argument("run_baseline: T must be >= 1");
    if (data.rows() == 0) throw std::invalid_argument("run_baseline: empty data");
    const Eigen::Index n = data.rows();
    std::vector<GeneratorPtr> components;
    std::vector<double> selection_scores;

    switch (opt.variant) {
        case BaselineVariant::Vanilla: {
            components = {fit_weak_learner(WeightedSample::uniform(data), opt.learner, rng)};
            break;
        }
        case BaselineVariant::Ensemble:
        case BaselineVariant::BestOfT: {
            Points train = data;
            Points validation;
            if (opt.variant == BaselineVariant::BestOfT) {
                std::vector<Eigen::Index> idx(n);
                std::iota(idx.begin(), idx.end(), 0);
                rng.shuffle(idx);
                const Eigen::Index v =
                    std::max<Eigen::Index>(1, static_cast<Eigen::Index>(
                                                  opt.validation_fraction * static_cast<double>(n)));
                validation.resize(v, data.cols());
                train.resize(n - v, data.cols());
                for (Eigen::Index i = 0; i < v; ++i) validation.row(i) = data.row(idx[i]);
                for (Eigen::Index i = v; i < n; ++i) train.row(i - v) = data.row(idx[i]);
            }
            for (int t = 0; t < opt.T; ++t) {
                auto g = fit_weak_learner(WeightedSample::uniform(train), opt.learner, rng);
                if (opt.variant == BaselineVariant::BestOfT) {
                    // selection on the reported target metric, knowingly optimistic
                    const Points ms = g->sample(opt.coverage_samples, rng);
                    const LogDensityFn fn = [&g](const Eigen::Ref<const Eigen::VectorXd>& x) {
                        return g->log_density(x);
                    };
                    selection_scores.push_back(coverage_c(fn, ms, validation));
                }
                components.push_back(std::move(g));
            }
            break;
        }
        case BaselineVariant::TopKLast:
        case BaselineVariant::TopK: {
            if (!(opt.r > 0.0) || opt.r > 1.0)
                throw std::invalid_argument("run_baseline: r must lie in (0, 1]");
            components = {fit_weak_learner(WeightedSample::uniform(data), opt.learner, rng)};
            GeneratorMixture mix = GeneratorMixture::single(components[0]);
            // the data-side KDE of the oracle does not depend on the model;
            // fit it once and reuse it against every round's reference
            std::optional<KdeModel> data_kde;
            if (opt.T > 1 && opt.discriminator.mode == DiscriminatorMode::Oracle) {
                const Points anchors =
                    detail::subsample_rows(data, opt.discriminator.kde_anchor_cap, rng);
                data_kde = kde_fit(anchors,
                                   default_bandwidth_grid(anchors, opt.discriminator.kde_grid_size),
                                   opt.discriminator.kde_folds, rng);
            }
            const WeightedSample uniform = WeightedSample::uniform(data);
            for (int t = 2; t <= opt.T; ++t) {
                const GeneratorPtr reference =
                    opt.variant == BaselineVariant::TopKLast
                        ? components.back()
                        : std::make_shared<GeneratorMixture>(mix);
                const DiscriminatorPtr disc =
                    data_kde ? std::make_shared<OracleDiscriminator>(*data_kde, reference)
                             : fit_discriminator(uniform, reference, opt.discriminator, rng);
                const Eigen::VectorXd d = disc->predict_batch(data);
                // keep the examples the discriminator most confidently calls real
                std::vector<Eigen::Index> order(n);
                std::iota(order.begin(), order.end(), 0);
                std::stable_sort(order.begin(), order.end(),
                                 [&](Eigen::Index a, Eigen::Index b) { return d[a] > d[b]; });
                const Eigen::Index kept = std::max<Eigen::Index>(
                    opt.learner.min_fit_points(data.cols()),
                    static_cast<Eigen::Index>(opt.r * static_cast<double>(n)));
                Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
                for (Eigen::Index i = 0; i < std::min(kept, n); ++i)
                    w[order[static_cast<std::size_t>(i)]] = 1.0 / static_cast<double>(std::min(kept, n));
                auto g = fit_weak_learner(WeightedSample(data, w), opt.learner, rng);
                mix = mixture_add_component(mix, g, 1.0 / static_cast<double>(t));
                components.push_back(std::move(g));
            }
            break;
        }
    }
    GeneratorMixture final_mixture = detail::baseline_prefix(
        opt.variant, components, selection_scores, static_cast<int>(components.size()));
    return {opt.variant, std::move(final_mixture), std::move(components),
            std::move(selection_scores)};
}

}  // namespace adagan
