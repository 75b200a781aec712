#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "adagan/boosting.hpp"
#include "adagan/kde.hpp"
#include "adagan/metrics.hpp"
#include "adagan/toy_data.hpp"

namespace adagan {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct AlgorithmSpec {
    enum class Kind { Adagan, Vanilla, BestOfT, Ensemble, TopKLast, TopK };

    std::string name;
    Kind kind = Kind::Adagan;
    int T = 10;
    BetaSchedule schedule;  // boosting only
    double r = 0.5;         // top-k variants
    LearnerConfig learner;
    DiscriminatorConfig discriminator;
};

struct ExperimentConfig {
    ToyDatasetSpec dataset;
    std::vector<AlgorithmSpec> algorithms;
    int repeats = 35;  // desk-scale configs override down to 15
    std::uint64_t master_seed = 0;
    Eigen::Index model_samples = 5000;
    bool kde_coverage = false;  // estimate the coverage density from model samples
};

struct ReportRow {
    std::string algorithm;
    int modes = 0;
    int T = 1;
    std::string metric;
    double median = 0.0;
    double p5 = 0.0;
    double p95 = 0.0;
    int repeats = 0;
    int failed = 0;
    std::vector<double> raw;                         // final-iteration value per repeat
    std::vector<std::vector<double>> per_iteration;  // [repeat][t-1]
    std::vector<double> iter_median, iter_p5, iter_p95;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ReportRow> rows;

    // schema: algorithm,modes,T,metric,median,p5,p95,repeats,failed
    std::string to_csv() const {
        std::string out = "algorithm,modes,T,metric,median,p5,p95,repeats,failed\n";
        char buf[256];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof(buf), "%s,%d,%d,%s,%.6g,%.6g,%.6g,%d,%d\n",
                          r.algorithm.c_str(), r.modes, r.T, r.metric.c_str(), r.median, r.p5,
                          r.p95, r.repeats, r.failed);
            out += buf;
        }
        return out;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["dataset"] = {{"modes", config.dataset.mode_count},
                        {"half_width", config.dataset.square_half_width},
                        {"sigma", config.dataset.sigma()},
                        {"dataset_seed", config.dataset.dataset_seed},
                        {"train_size", config.dataset.train_size},
                        {"test_size", config.dataset.test_size}};
        j["master_seed"] = config.master_seed;
        j["repeats"] = config.repeats;
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json e;
            e["algorithm"] = r.algorithm;
            e["modes"] = r.modes;
            e["T"] = r.T;
            e["metric"] = r.metric;
            e["median"] = r.median;
            e["p5"] = r.p5;
            e["p95"] = r.p95;
            e["repeats"] = r.repeats;
            e["failed"] = r.failed;
            e["raw"] = r.raw;
            e["iter_median"] = r.iter_median;
            e["iter_p5"] = r.iter_p5;
            e["iter_p95"] = r.iter_p95;
            j["rows"].push_back(std::move(e));
        }
        return j;
    }
};

// Linear-interpolation percentile of an unsorted sample, q in [0, 100].
inline double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile: empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

// ---- config parsing ---------------------------------------------------------

namespace detail {

inline LearnerConfig learner_from_json(const nlohmann::json& j) {
    LearnerConfig cfg;
    if (j.is_null()) return cfg;
    const std::string type = j.value("type", "gaussian");
    if (type == "gaussian") {
        cfg.type = LearnerConfig::Type::Gaussian;
    } else if (type == "gmm") {
        cfg.type = LearnerConfig::Type::GaussianMixtureEm;
        cfg.k = j.value("k", 2);
        cfg.restarts = j.value("restarts", 3);
        cfg.em_iters = j.value("em_iters", 100);
    } else {
        throw ConfigError("unknown learner type: " + type);
    }
    cfg.resample_fit = j.value("resample", false);
    return cfg;
}

inline DiscriminatorConfig discriminator_from_json(const nlohmann::json& j) {
    DiscriminatorConfig cfg;
    if (j.is_null()) return cfg;
    const std::string mode = j.value("mode", "oracle");
    if (mode == "oracle")
        cfg.mode = DiscriminatorMode::Oracle;
    else if (mode == "classifier")
        cfg.mode = DiscriminatorMode::Classifier;
    else
        throw ConfigError("unknown discriminator mode: " + mode);
    cfg.kde_anchor_cap = j.value("kde_anchor_cap", cfg.kde_anchor_cap);
    cfg.kde_grid_size = j.value("kde_grid", cfg.kde_grid_size);
    cfg.kde_folds = j.value("kde_folds", cfg.kde_folds);
    return cfg;
}

inline BetaSchedule schedule_from_json(const nlohmann::json& j) {
    if (j.is_null()) return BetaSchedule::one_over_t();
    const std::string type = j.value("type", "one_over_t");
    if (type == "one_over_t") return BetaSchedule::one_over_t();
    if (type == "constant") return BetaSchedule::constant(j.value("beta", 0.5));
    if (type == "top_ratio") return BetaSchedule::top_ratio(j.value("r", 0.5));
    if (type == "top_ratio_decay")
        return BetaSchedule::top_ratio_decay(j.value("c1", 0.5), j.value("c2", 0.1));
    if (type == "ratio_from_threshold")
        return BetaSchedule::ratio_from_threshold(j.value("tau", 1.0));
    throw ConfigError("unknown schedule type: " + type);
}

inline ToyDatasetSpec dataset_from_json(const nlohmann::json& j) {
    ToyDatasetSpec spec;
    if (j.is_null()) throw ConfigError("config is missing the dataset block");
    spec.mode_count = j.value("modes", spec.mode_count);
    spec.square_half_width = j.value("half_width", spec.square_half_width);
    spec.sigma_base = j.value("sigma_base", spec.sigma_base);
    spec.dataset_seed = j.value("dataset_seed", spec.dataset_seed);
    spec.train_size = j.value("train_size", static_cast<Eigen::Index>(spec.train_size));
    spec.test_size = j.value("test_size", static_cast<Eigen::Index>(spec.test_size));
    if (spec.mode_count < 1) throw ConfigError("dataset.modes must be >= 1");
    if (spec.train_size < 10 || spec.test_size < 10)
        throw ConfigError("dataset sizes must be at least 10");
    return spec;
}

inline AlgorithmSpec algorithm_from_json(const nlohmann::json& j) {
    AlgorithmSpec spec;
    const std::string variant = j.value("variant", "adagan");
    if (variant == "adagan")
        spec.kind = AlgorithmSpec::Kind::Adagan;
    else if (variant == "vanilla")
        spec.kind = AlgorithmSpec::Kind::Vanilla;
    else if (variant == "best_of_t")
        spec.kind = AlgorithmSpec::Kind::BestOfT;
    else if (variant == "ensemble")
        spec.kind = AlgorithmSpec::Kind::Ensemble;
    else if (variant == "topk_last")
        spec.kind = AlgorithmSpec::Kind::TopKLast;
    else if (variant == "topk")
        spec.kind = AlgorithmSpec::Kind::TopK;
    else
        throw ConfigError("unknown algorithm variant: " + variant);
    spec.name = j.value("name", variant);
    spec.T = j.value("T", spec.kind == AlgorithmSpec::Kind::Vanilla ? 1 : 10);
    if (spec.T < 1) throw ConfigError("algorithm T must be >= 1");
    if (spec.kind == AlgorithmSpec::Kind::Vanilla) spec.T = 1;
    spec.r = j.value("r", 0.5);
    spec.schedule = schedule_from_json(j.contains("schedule") ? j["schedule"] : nlohmann::json());
    spec.learner = learner_from_json(j.contains("learner") ? j["learner"] : nlohmann::json());
    spec.discriminator = discriminator_from_json(
        j.contains("discriminator") ? j["discriminator"] : nlohmann::json());
    return spec;
}

}  // namespace detail

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.dataset = detail::dataset_from_json(j.contains("dataset") ? j["dataset"] : nlohmann::json());
    cfg.repeats = j.value("repeats", cfg.repeats);
    if (cfg.repeats < 1) throw ConfigError("repeats must be >= 1");
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.model_samples = j.value("model_samples", static_cast<Eigen::Index>(cfg.model_samples));
    if (cfg.model_samples < 100) throw ConfigError("model_samples must be >= 100");
    cfg.kde_coverage = j.value("coverage_density", std::string("analytic")) == "kde";
    if (!j.contains("algorithms") || !j["algorithms"].is_array() || j["algorithms"].empty())
        throw ConfigError("config needs a non-empty algorithms array");
    for (const auto& a : j["algorithms"]) cfg.algorithms.push_back(detail::algorithm_from_json(a));
    return cfg;
}

// ---- experiment execution ----------------------------------------------------

namespace detail {

// per-iteration prefix mixtures for one run of any algorithm variant
inline std::vector<GeneratorMixture> run_algorithm_prefixes(const Points& train,
                                                            const AlgorithmSpec& alg, Rng& rng) {
    std::vector<GeneratorMixture> prefixes;
    if (alg.kind == AlgorithmSpec::Kind::Adagan) {
        AdaganOptions opt;
        opt.T = alg.T;
        opt.schedule = alg.schedule;
        opt.learner = alg.learner;
        opt.discriminator = alg.discriminator;
        const AdaganRun run = run_adagan(train, opt, rng);
        for (int t = 1; t <= alg.T; ++t) prefixes.push_back(run.prefix_mixture(t));
        return prefixes;
    }
    BaselineOptions opt;
    opt.T = alg.T;
    opt.r = alg.r;
    opt.learner = alg.learner;
    opt.discriminator = alg.discriminator;
    switch (alg.kind) {
        case AlgorithmSpec::Kind::Vanilla: opt.variant = BaselineVariant::Vanilla; break;
        case AlgorithmSpec::Kind::BestOfT: opt.variant = BaselineVariant::BestOfT; break;
        case AlgorithmSpec::Kind::Ensemble: opt.variant = BaselineVariant::Ensemble; break;
        case AlgorithmSpec::Kind::TopKLast: opt.variant = BaselineVariant::TopKLast; break;
        case AlgorithmSpec::Kind::TopK: opt.variant = BaselineVariant::TopK; break;
        default: break;
    }
    const BaselineRun run = run_baseline(train, opt, rng);
    for (int t = 1; t <= alg.T; ++t) prefixes.push_back(run.prefix_mixture(t));
    return prefixes;
}

}  // namespace detail

// Runs every configured algorithm for `repeats` independent repetitions on
// the shared toy target and aggregates coverage and likelihood into
// median / 5% / 95% rows, with the per-iteration series retained. Streams
// are derived per (algorithm, repeat, role), so results are reproducible
// regardless of scheduling; data draws are shared across algorithms within
// a repeat.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    ExperimentReport report{config, {}};
    const std::vector<std::string> metric_names = {"coverage", "loglik"};

    for (std::size_t ai = 0; ai < config.algorithms.size(); ++ai) {
        const AlgorithmSpec& alg = config.algorithms[ai];
        std::vector<std::vector<double>> coverage_runs, loglik_runs;
        int failed = 0;

        for (int rep = 0; rep < config.repeats; ++rep) {
            Rng data_rng(derive_seed(config.master_seed, {1, static_cast<std::uint64_t>(rep)}));
            const ToyDataset data = generate_toy_dataset(config.dataset, data_rng);
            Rng algo_rng(derive_seed(config.master_seed,
                                     {2, ai, static_cast<std::uint64_t>(rep)}));
            try {
                const auto prefixes = detail::run_algorithm_prefixes(data.train, alg, algo_rng);
                std::vector<double> cov_series, ll_series;
                for (std::size_t t = 0; t < prefixes.size(); ++t) {
                    const GeneratorMixture& model = prefixes[t];
                    Rng metric_rng(derive_seed(
                        config.master_seed,
                        {3, ai, static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(t)}));
                    const Points model_samples = model.sample(config.model_samples, metric_rng);
                    const LogDensityFn analytic = [&model](
                                                      const Eigen::Ref<const Eigen::VectorXd>& x) {
                        return model.log_density(x);
                    };
                    double cov;
                    if (config.kde_coverage) {
                        const KdeModel kde =
                            kde_fit(model_samples, default_bandwidth_grid(model_samples, 10), 5,
                                    metric_rng);
                        const LogDensityFn est = [&kde](
                                                     const Eigen::Ref<const Eigen::VectorXd>& x) {
                            return kde.log_density(x);
                        };
                        cov = coverage_c(est, model_samples, data.test);
                    } else {
                        cov = coverage_c(analytic, model_samples, data.test);
                    }
                    cov_series.push_back(cov);
                    ll_series.push_back(log_likelihood_l(analytic, data.test));
                }
                coverage_runs.push_back(std::move(cov_series));
                loglik_runs.push_back(std::move(ll_series));
            } catch (const std::exception&) {
                ++failed;
            }
        }

        for (const std::string& metric : metric_names) {
            const auto& runs = metric == "coverage" ? coverage_runs : loglik_runs;
            ReportRow row;
            row.algorithm = alg.name;
            row.modes = config.dataset.mode_count;
            row.T = alg.T;
            row.metric = metric;
            row.repeats = config.repeats;
            row.failed = failed;
            for (const auto& series : runs) row.raw.push_back(series.back());
            row.per_iteration = runs;
            if (!row.raw.empty()) {
                row.median = percentile(row.raw, 50.0);
                row.p5 = percentile(row.raw, 5.0);
                row.p95 = percentile(row.raw, 95.0);
                for (int t = 0; t < alg.T; ++t) {
                    std::vector<double> at_t;
                    for (const auto& series : runs)
                        at_t.push_back(series[static_cast<std::size_t>(t)]);
                    row.iter_median.push_back(percentile(at_t, 50.0));
                    row.iter_p5.push_back(percentile(at_t, 5.0));
                    row.iter_p95.push_back(percentile(at_t, 95.0));
                }
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

// Per-iteration series as plot-ready columns: one row per
// (algorithm, metric, statistic), one column per boosting iteration.
inline std::string plot_data_csv(const nlohmann::json& report_json) {
    if (!report_json.contains("rows")) throw ConfigError("report has no rows");
    std::size_t max_t = 0;
    for (const auto& row : report_json["rows"])
        max_t = std::max(max_t, row["iter_median"].size());

    std::ostringstream out;
    out << "algorithm,metric,stat";
    for (std::size_t t = 1; t <= max_t; ++t) out << ",t" << t;
    out << "\n";
    char buf[64];
    for (const auto& row : report_json["rows"]) {
        for (const char* stat : {"median", "p5", "p95"}) {
            const auto& series = row[std::string("iter_") + stat];
            out << row["algorithm"].get<std::string>() << ','
                << row["metric"].get<std::string>() << ',' << stat;
            for (std::size_t t = 0; t < max_t; ++t) {
                if (t < series.size()) {
                    std::snprintf(buf, sizeof(buf), ",%.6g", series[t].get<double>());
                    out << buf;
                } else {
                    out << ',';
                }
            }
            out << "\n";
        }
    }
    return out.str();
}

// One reweighting round on a configured dataset, reported per example:
// position, discriminator output, density ratio, and the resulting weight.
inline std::string weights_demo_csv(const nlohmann::json& j) {
    const ToyDatasetSpec spec =
        detail::dataset_from_json(j.contains("dataset") ? j["dataset"] : nlohmann::json());
    const double beta = j.value("beta", 0.5);
    if (!(beta > 0.0) || beta > 1.0) throw ConfigError("weights demo: beta must lie in (0, 1]");
    Rng rng(j.value("seed", 0ULL));
    const ToyDataset data = generate_toy_dataset(spec, rng);
    const LearnerConfig learner =
        detail::learner_from_json(j.contains("learner") ? j["learner"] : nlohmann::json());
    const DiscriminatorConfig disc_cfg = detail::discriminator_from_json(
        j.contains("discriminator") ? j["discriminator"] : nlohmann::json());

    GeneratorPtr model;
    if (j.contains("model") && j["model"].is_object())
        model = generator_from_json(j["model"]);
    else
        model = fit_weak_learner(WeightedSample::uniform(data.train), learner, rng);

    const auto disc =
        fit_discriminator(WeightedSample::uniform(data.train), model, disc_cfg, rng);
    const Eigen::VectorXd d = disc->predict_batch(data.train);
    const std::vector<double> d_values(d.data(), d.data() + d.size());
    const std::vector<double> p(static_cast<std::size_t>(data.train.rows()),
                                1.0 / static_cast<double>(data.train.rows()));
    const auto upd = update_training_weights(d_values, p, beta);

    std::ostringstream out;
    out << "index";
    for (Eigen::Index c = 0; c < data.train.cols(); ++c) out << ",x" << c;
    out << ",d,h,w\n";
    char buf[160];
    for (Eigen::Index i = 0; i < data.train.rows(); ++i) {
        out << i;
        for (Eigen::Index c = 0; c < data.train.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), ",%.6g", data.train(i, c));
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.6g,%.6g,%.6g\n", d_values[static_cast<std::size_t>(i)],
                      density_ratio_from_discriminator(d_values[static_cast<std::size_t>(i)]),
                      upd.weights[static_cast<std::size_t>(i)]);
        out << buf;
    }
    return out.str();
}

}  // namespace adagan
