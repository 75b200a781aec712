#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "adagan/boosting.hpp"
#include "adagan/experiment.hpp"
#include "adagan/toy_data.hpp"
#include "adagan/weights.hpp"

using namespace adagan;

namespace {

GeneratorPtr isotropic_gaussian(double x, double y, double sigma) {
    Eigen::VectorXd mean(2);
    mean << x, y;
    return std::make_shared<GaussianGenerator>(mean, sigma * sigma * Eigen::Matrix2d::Identity());
}

// Balanced two-mode sample at (-5,0) and (5,0).
Points two_mode_points(Eigen::Index n, double sigma, Rng& rng) {
    Points pts(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double cx = i < n / 2 ? -5.0 : 5.0;
        pts(i, 0) = cx + sigma * rng.normal();
        pts(i, 1) = sigma * rng.normal();
    }
    return pts;
}

}  // namespace

TEST_SUITE("training_weights") {
    TEST_CASE("beta = 1 returns the base weights unchanged") {
        const std::vector<double> p = {0.25, 0.25, 0.25, 0.25};
        const auto upd = update_training_weights({0.9, 0.6, 0.4, 0.1}, p, 1.0);
        for (std::size_t i = 0; i < p.size(); ++i)
            CHECK(upd.weights[i] == doctest::Approx(p[i]).epsilon(1e-12));
        CHECK(upd.lambda == doctest::Approx(1.0));
    }

    TEST_CASE("worked fixture: lambda 71/72 and the exact weight fractions") {
        // d = (0.8, 0.6, 0.5, 0.2) gives h = (1/4, 2/3, 1, 4)
        const std::vector<double> p = {0.25, 0.25, 0.25, 0.25};
        const auto upd = update_training_weights({0.8, 0.6, 0.5, 0.2}, p, 0.5);
        CHECK(std::abs(upd.lambda - 71.0 / 72.0) <= 1e-12);
        CHECK(upd.weights[0] == doctest::Approx(31.0 / 72.0).epsilon(1e-12));
        CHECK(upd.weights[1] == doctest::Approx(47.0 / 144.0).epsilon(1e-12));
        CHECK(upd.weights[2] == doctest::Approx(35.0 / 144.0).epsilon(1e-12));
        CHECK(upd.weights[3] == doctest::Approx(0.0).epsilon(1e-12));
        double sum = 0.0;
        for (double w : upd.weights) sum += w;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }

    TEST_CASE("an indistinguishable model keeps the weights") {
        const std::vector<double> p = {0.2, 0.3, 0.5};
        const auto upd = update_training_weights({0.5, 0.5, 0.5}, p, 0.3);
        for (std::size_t i = 0; i < p.size(); ++i)
            CHECK(upd.weights[i] == doctest::Approx(p[i]).epsilon(1e-12));
    }

    TEST_CASE("weights decrease in the ratio and normalize on random input") {
        Rng rng(51);
        for (int it = 0; it < 500; ++it) {
            const std::size_t n = 2 + rng.uniform_index(63);
            std::vector<double> d(n), p(n, 1.0 / static_cast<double>(n));
            for (auto& v : d) v = rng.uniform(0.01, 0.99);
            const double beta = rng.uniform(0.05, 1.0);
            const auto upd = update_training_weights(d, p, beta);
            double sum = 0.0;
            for (double w : upd.weights) sum += w;
            CHECK(std::abs(sum - 1.0) <= 1e-9);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    const double hi = density_ratio_from_discriminator(d[i]);
                    const double hj = density_ratio_from_discriminator(d[j]);
                    if (hi > hj)
                        CHECK(upd.weights[i] <= upd.weights[j] + 1e-12);
                }
            }
        }
    }
}

TEST_SUITE("beta_selection") {
    TEST_CASE("requesting nearly all examples keeps everyone positive") {
        const std::vector<double> p(8, 0.125);
        const std::vector<double> d = {0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2};
        const auto sel = choose_beta_for_ratio(0.999, d, p);
        CHECK(sel.positive_count == 8);
    }

    TEST_CASE("the worked fixture keeps three of four at r = 0.75") {
        const std::vector<double> p(4, 0.25);
        const std::vector<double> d = {0.8, 0.6, 0.5, 0.2};
        const auto sel = choose_beta_for_ratio(0.75, d, p);
        CHECK(sel.exact);
        CHECK(sel.positive_count == 3);
        // the worked lambda example sits at beta = 0.5 with exactly 3 positive
        const auto at_half = update_training_weights(d, p, 0.5);
        std::size_t positive = 0;
        for (double w : at_half.weights)
            if (w > 0.0) ++positive;
        CHECK(positive == 3);
    }

    TEST_CASE("small r isolates the least covered example") {
        const std::vector<double> p(4, 0.25);
        const std::vector<double> d = {0.8, 0.6, 0.5, 0.2};
        const auto sel = choose_beta_for_ratio(0.25, d, p);
        CHECK(sel.positive_count == 1);
        const auto upd = update_training_weights(d, p, sel.beta);
        // the active set grows from the smallest ratio upward, so the sole
        // survivor is the example with the most confident "real" call
        CHECK(upd.weights[0] > 0.0);
        for (std::size_t i = 1; i < 4; ++i) CHECK(upd.weights[i] == 0.0);
    }

    TEST_CASE("positive count grows with beta") {
        Rng rng(52);
        const std::size_t n = 32;
        std::vector<double> d(n), p(n, 1.0 / n);
        for (auto& v : d) v = rng.uniform(0.05, 0.95);
        std::size_t prev = 0;
        for (double beta : {0.05, 0.2, 0.4, 0.6, 0.8, 0.999}) {
            const auto upd = update_training_weights(d, p, beta);
            std::size_t c = 0;
            for (double w : upd.weights)
                if (w > 0.0) ++c;
            CHECK(c >= prev);
            prev = c;
        }
    }

    TEST_CASE("ties make some counts unreachable") {
        const std::vector<double> p(4, 0.25);
        const std::vector<double> d = {0.2, 0.2, 0.2, 0.9};  // three tied ratios
        const auto sel = choose_beta_for_ratio(0.5, d, p);    // target 2 unreachable
        CHECK(!sel.exact);
        CHECK((sel.positive_count == 1 || sel.positive_count == 3));
    }
}

TEST_SUITE("schedules") {
    TEST_CASE("one-over-t and constant schedules") {
        const std::vector<double> d = {0.5, 0.5};
        const std::vector<double> p = {0.5, 0.5};
        const auto one_over_t = BetaSchedule::one_over_t();
        CHECK(one_over_t.evaluate(2, d, p) == doctest::Approx(0.5));
        CHECK(one_over_t.evaluate(3, d, p) == doctest::Approx(1.0 / 3.0));
        const auto constant = BetaSchedule::constant(0.3);
        for (int t = 2; t < 6; ++t) CHECK(constant.evaluate(t, d, p) == doctest::Approx(0.3));
        CHECK_THROWS_AS(BetaSchedule::constant(0.0), std::invalid_argument);
        CHECK_THROWS_AS(BetaSchedule::top_ratio(1.0), std::invalid_argument);
    }

    TEST_CASE("ratio-driven schedules select beta by positive count") {
        Rng rng(65);
        const std::size_t n = 40;
        std::vector<double> d(n), p(n, 1.0 / n);
        for (auto& v : d) v = rng.uniform(0.05, 0.95);

        const auto top = BetaSchedule::top_ratio(0.5);
        const double beta = top.evaluate(2, d, p);
        const auto upd = update_training_weights(d, p, beta);
        std::size_t positive = 0;
        for (double w : upd.weights)
            if (w > 0.0) ++positive;
        CHECK(positive == 20);

        // the decaying variant shrinks the kept fraction over iterations
        const auto decay = BetaSchedule::top_ratio_decay(0.8, 0.3);
        const double b2 = decay.evaluate(2, d, p);
        const double b8 = decay.evaluate(8, d, p);
        CHECK(b8 < b2);

        // the threshold variant derives the fraction from ratios above tau
        const auto thresh = BetaSchedule::ratio_from_threshold(1.0);
        const double bt = thresh.evaluate(2, d, p);
        CHECK(bt > 0.0);
        CHECK(bt <= 1.0);
        std::size_t above = 0;
        for (double v : d)
            if (density_ratio_from_discriminator(v) > 1.0) ++above;
        const auto upd_t = update_training_weights(d, p, bt);
        std::size_t positive_t = 0;
        for (double w : upd_t.weights)
            if (w > 0.0) ++positive_t;
        CHECK(positive_t == above);
    }
}

TEST_SUITE("boosting") {
    TEST_CASE("T = 1 is exactly the vanilla fit") {
        Rng rng(53);
        const Points pts = two_mode_points(400, 0.5, rng);
        AdaganOptions opt;
        opt.T = 1;
        Rng r1(7), r2(7);
        const auto run = run_adagan(pts, opt, r1);
        const auto direct = fit_gaussian(WeightedSample::uniform(pts));
        CHECK(run.mixture.component_count() == 1);
        Eigen::VectorXd x(2);
        x << 0.3, -0.2;
        CHECK(run.mixture.log_density(x) == doctest::Approx(direct.log_density(x)).epsilon(1e-12));
    }

    TEST_CASE("one-over-t schedule leaves equal alphas") {
        Rng rng(54);
        const Points pts = two_mode_points(600, 0.5, rng);
        AdaganOptions opt;
        opt.T = 5;
        opt.schedule = BetaSchedule::one_over_t();
        opt.discriminator.mode = DiscriminatorMode::Classifier;
        const auto run = run_adagan(pts, opt, rng);
        REQUIRE(run.mixture.component_count() == 5);
        for (double a : run.mixture.alphas()) CHECK(a == doctest::Approx(0.2).epsilon(1e-9));
        // per-round records are complete and normalized
        REQUIRE(run.iterations.size() == 4);
        for (const auto& rec : run.iterations) {
            CHECK(rec.beta > 0.0);
            CHECK(rec.beta <= 1.0);
            CHECK(rec.weight_max >= rec.weight_min);
        }
    }

    TEST_CASE("round-two weights concentrate on the uncovered mode") {
        Rng rng(55);
        const Points pts = two_mode_points(1000, 0.5, rng);
        AdaganOptions opt;
        opt.T = 2;
        opt.schedule = BetaSchedule::constant(0.5);
        opt.record_weights = true;
        // first component sits exactly on the left mode
        opt.initial_component = isotropic_gaussian(-5.0, 0.0, 0.5);
        const auto run = run_adagan(pts, opt, rng);
        REQUIRE(run.iterations.size() == 1);
        const auto& w = run.iterations[0].weights;
        REQUIRE(w.size() == 1000);
        double right_mass = 0.0, total = 0.0;
        for (Eigen::Index i = 0; i < pts.rows(); ++i) {
            total += w[static_cast<std::size_t>(i)];
            if (pts(i, 0) > 0.0) right_mass += w[static_cast<std::size_t>(i)];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(right_mass / total >= 0.8);
        // and the second component lands on that mode
        const auto* second = dynamic_cast<const GaussianGenerator*>(
            run.mixture.components()[1].get());
        REQUIRE(second != nullptr);
        CHECK(second->mean()[0] > 3.0);
    }

    TEST_CASE("starving beta triggers the top-slice fallback") {
        Rng rng(63);
        const Points pts = two_mode_points(400, 0.5, rng);
        AdaganOptions opt;
        opt.T = 2;
        opt.schedule = BetaSchedule::constant(1e-7);  // keeps almost nobody positive
        // classifier outputs vary smoothly, so the tiny active set is not a tie block
        opt.discriminator.mode = DiscriminatorMode::Classifier;
        opt.initial_component = isotropic_gaussian(-5.0, 0.0, 0.5);
        opt.record_weights = true;
        const auto run = run_adagan(pts, opt, rng);
        REQUIRE(run.iterations.size() == 1);
        CHECK(run.iterations[0].fallback);
        // the fallback slice is uniform over the learner's minimum fit size
        long positive = 0;
        for (double w : run.iterations[0].weights)
            if (w > 0.0) ++positive;
        CHECK(positive == 10);
    }

    TEST_CASE("a failing weak learner aborts with the partial run attached") {
        // two points cannot support the EM learner at round two
        Points pts(2, 2);
        pts << -5.0, 0.0, 5.0, 0.0;
        AdaganOptions opt;
        opt.T = 3;
        opt.schedule = BetaSchedule::constant(0.5);
        opt.discriminator.mode = DiscriminatorMode::Classifier;
        opt.learner.type = LearnerConfig::Type::GaussianMixtureEm;
        opt.learner.k = 1;
        opt.initial_component = isotropic_gaussian(-5.0, 0.0, 0.5);
        Rng rng(64);
        try {
            run_adagan(pts, opt, rng);
            FAIL("expected BoostingError");
        } catch (const BoostingError& e) {
            CHECK(e.failed_iteration() == 2);
            CHECK(e.partial_run().mixture.component_count() == 1);
        }
    }

    TEST_CASE("identical seeds give identical serialized mixtures") {
        Rng data_rng(56);
        const Points pts = two_mode_points(500, 0.5, data_rng);
        AdaganOptions opt;
        opt.T = 3;
        opt.discriminator.mode = DiscriminatorMode::Classifier;
        Rng r1(99), r2(99), r3(100);
        const auto a = run_adagan(pts, opt, r1).mixture.to_json().dump();
        const auto b = run_adagan(pts, opt, r2).mixture.to_json().dump();
        CHECK(a == b);
        const auto c = run_adagan(pts, opt, r3).mixture.to_json().dump();
        (void)c;  // different stream may or may not differ for a deterministic learner
    }
}

TEST_SUITE("baselines") {
    TEST_CASE("ensemble of one equals vanilla") {
        Rng rng(57);
        const Points pts = two_mode_points(300, 0.5, rng);
        BaselineOptions vanilla;
        vanilla.variant = BaselineVariant::Vanilla;
        BaselineOptions ens;
        ens.variant = BaselineVariant::Ensemble;
        ens.T = 1;
        Rng r1(1), r2(1);
        const auto a = run_baseline(pts, vanilla, r1).mixture.to_json().dump();
        const auto b = run_baseline(pts, ens, r2).mixture.to_json().dump();
        CHECK(a == b);
    }

    TEST_CASE("top-k-last with r = 1 is a sequential uniform ensemble") {
        Rng rng(58);
        const Points pts = two_mode_points(300, 0.5, rng);
        BaselineOptions opt;
        opt.variant = BaselineVariant::TopKLast;
        opt.r = 1.0;
        opt.T = 3;
        opt.discriminator.mode = DiscriminatorMode::Classifier;
        const auto run = run_baseline(pts, opt, rng);
        REQUIRE(run.mixture.component_count() == 3);
        // r = 1 keeps every example, so each fit sees uniform weights
        Eigen::VectorXd x(2);
        x << 1.0, 0.5;
        const auto direct = fit_gaussian(WeightedSample::uniform(pts));
        for (const auto& comp : run.mixture.components())
            CHECK(comp->log_density(x) == doctest::Approx(direct.log_density(x)).epsilon(1e-9));
        for (double a : run.mixture.alphas())
            CHECK(a == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    }

    TEST_CASE("best-of-T beats vanilla in median over repeats with a noisy learner") {
        // the selection effect needs run-to-run variance, so use single-restart
        // EM with k = 2: its local optima differ across seeds
        LearnerConfig noisy;
        noisy.type = LearnerConfig::Type::GaussianMixtureEm;
        noisy.k = 2;
        noisy.restarts = 1;
        noisy.em_iters = 40;

        ToyDatasetSpec spec;
        spec.mode_count = 5;
        spec.dataset_seed = 11;
        spec.train_size = 1500;
        spec.test_size = 1500;

        std::vector<double> vanilla_cov, best_cov;
        for (int rep = 0; rep < 15; ++rep) {
            Rng data_rng(derive_seed(77, {static_cast<std::uint64_t>(rep)}));
            const ToyDataset data = generate_toy_dataset(spec, data_rng);
            Rng r1(derive_seed(78, {static_cast<std::uint64_t>(rep)}));
            Rng r2(derive_seed(78, {static_cast<std::uint64_t>(rep)}));

            BaselineOptions vo;
            vo.variant = BaselineVariant::Vanilla;
            vo.learner = noisy;
            BaselineOptions bo;
            bo.variant = BaselineVariant::BestOfT;
            bo.T = 3;
            bo.learner = noisy;

            auto eval = [&](const GeneratorMixture& m, Rng& rng) {
                const Points ms = m.sample(1000, rng);
                const LogDensityFn fn = [&m](const Eigen::Ref<const Eigen::VectorXd>& x) {
                    return m.log_density(x);
                };
                return coverage_c(fn, ms, data.test);
            };
            vanilla_cov.push_back(eval(run_baseline(data.train, vo, r1).mixture, r1));
            best_cov.push_back(eval(run_baseline(data.train, bo, r2).mixture, r2));
        }
        CHECK(percentile(best_cov, 50.0) >= percentile(vanilla_cov, 50.0));
    }

    TEST_CASE("larger ensembles of a noisy learner cover at least as much") {
        LearnerConfig noisy;
        noisy.type = LearnerConfig::Type::GaussianMixtureEm;
        noisy.k = 2;
        noisy.restarts = 1;
        noisy.em_iters = 40;

        ToyDatasetSpec spec;
        spec.mode_count = 5;
        spec.dataset_seed = 11;
        spec.train_size = 1500;
        spec.test_size = 1500;

        std::vector<double> cov3, cov10;
        for (int rep = 0; rep < 15; ++rep) {
            Rng data_rng(derive_seed(88, {static_cast<std::uint64_t>(rep)}));
            const ToyDataset data = generate_toy_dataset(spec, data_rng);
            // the first three fits of the T=10 run are an Ensemble(3) run of
            // the same seed, so one run scores both prefixes
            Rng rng(derive_seed(89, {static_cast<std::uint64_t>(rep)}));
            BaselineOptions opt;
            opt.variant = BaselineVariant::Ensemble;
            opt.T = 10;
            opt.learner = noisy;
            const auto run = run_baseline(data.train, opt, rng);
            for (int T : {3, 10}) {
                const GeneratorMixture prefix = run.prefix_mixture(T);
                Rng mrng(derive_seed(90, {static_cast<std::uint64_t>(rep),
                                          static_cast<std::uint64_t>(T)}));
                const Points ms = prefix.sample(1000, mrng);
                const LogDensityFn fn = [&prefix](const Eigen::Ref<const Eigen::VectorXd>& x) {
                    return prefix.log_density(x);
                };
                (T == 3 ? cov3 : cov10).push_back(coverage_c(fn, ms, data.test));
            }
        }
        CHECK(percentile(cov10, 50.0) >= percentile(cov3, 50.0));
    }
}

TEST_SUITE("toy_data") {
    TEST_CASE("single mode is deterministic") {
        ToyDatasetSpec spec;
        spec.mode_count = 1;
        spec.dataset_seed = 3;
        spec.train_size = 50;
        spec.test_size = 50;
        const auto a = toy_mode_centers(spec);
        const auto b = toy_mode_centers(spec);
        REQUIRE(a.size() == 1);
        CHECK(a[0] == b[0]);
    }

    TEST_CASE("same seed reproduces centers and samples") {
        ToyDatasetSpec spec;
        spec.mode_count = 5;
        spec.dataset_seed = 4;
        spec.train_size = 100;
        spec.test_size = 100;
        Rng r1(9), r2(9);
        const auto a = generate_toy_dataset(spec, r1);
        const auto b = generate_toy_dataset(spec, r2);
        CHECK(a.train == b.train);
        CHECK(a.test == b.test);
    }

    TEST_CASE("modes are pairwise separated by six sigma") {
        ToyDatasetSpec spec;
        spec.mode_count = 5;
        spec.dataset_seed = 12;
        const auto centers = toy_mode_centers(spec);
        REQUIRE(centers.size() == 5);
        for (std::size_t i = 0; i < centers.size(); ++i)
            for (std::size_t j = i + 1; j < centers.size(); ++j)
                CHECK((centers[i] - centers[j]).norm() >= 6.0 * spec.sigma());
    }

    TEST_CASE("impossible separation reports a helpful error") {
        ToyDatasetSpec spec;
        spec.mode_count = 100;
        spec.square_half_width = 1.0;
        spec.sigma_base = 5.0;
        CHECK_THROWS_WITH_AS(toy_mode_centers(spec), doctest::Contains("larger square"),
                             std::runtime_error);
    }
}

TEST_SUITE("experiment") {
    TEST_CASE("single repeat collapses the percentiles") {
        ExperimentConfig cfg;
        cfg.dataset.mode_count = 2;
        cfg.dataset.dataset_seed = 5;
        cfg.dataset.train_size = 400;
        cfg.dataset.test_size = 400;
        cfg.repeats = 1;
        cfg.model_samples = 500;
        AlgorithmSpec vanilla;
        vanilla.name = "vanilla";
        vanilla.kind = AlgorithmSpec::Kind::Vanilla;
        vanilla.T = 1;
        cfg.algorithms = {vanilla};
        const auto report = run_experiment(cfg);
        REQUIRE(report.rows.size() == 2);
        for (const auto& row : report.rows) {
            CHECK(row.median == row.p5);
            CHECK(row.median == row.p95);
            CHECK(row.failed == 0);
        }
    }

    TEST_CASE("percentile ordering and csv schema") {
        ExperimentConfig cfg;
        cfg.dataset.mode_count = 2;
        cfg.dataset.dataset_seed = 5;
        cfg.dataset.train_size = 300;
        cfg.dataset.test_size = 300;
        cfg.repeats = 3;
        cfg.model_samples = 300;
        AlgorithmSpec boosted;
        boosted.name = "boosted";
        boosted.kind = AlgorithmSpec::Kind::Adagan;
        boosted.T = 3;
        boosted.discriminator.mode = DiscriminatorMode::Classifier;
        cfg.algorithms = {boosted};
        const auto report = run_experiment(cfg);
        for (const auto& row : report.rows) {
            CHECK(row.p5 <= row.median);
            CHECK(row.median <= row.p95);
            CHECK(row.iter_median.size() == 3);
        }
        const std::string csv = report.to_csv();
        CHECK(csv.rfind("algorithm,modes,T,metric,median,p5,p95,repeats,failed\n", 0) == 0);
        CHECK(csv.find("boosted,2,3,coverage,") != std::string::npos);
    }

    TEST_CASE("identical configs give byte-identical reports") {
        ExperimentConfig cfg;
        cfg.dataset.mode_count = 2;
        cfg.dataset.dataset_seed = 6;
        cfg.dataset.train_size = 300;
        cfg.dataset.test_size = 300;
        cfg.repeats = 2;
        cfg.model_samples = 300;
        cfg.master_seed = 123;
        AlgorithmSpec boosted;
        boosted.name = "boosted";
        boosted.kind = AlgorithmSpec::Kind::Adagan;
        boosted.T = 2;
        boosted.discriminator.mode = DiscriminatorMode::Classifier;
        cfg.algorithms = {boosted};
        const auto a = run_experiment(cfg);
        const auto b = run_experiment(cfg);
        CHECK(a.to_csv() == b.to_csv());
        CHECK(a.to_json().dump(2) == b.to_json().dump(2));
    }

    TEST_CASE("plot columns cover every iteration") {
        ExperimentConfig cfg;
        cfg.dataset.mode_count = 2;
        cfg.dataset.dataset_seed = 6;
        cfg.dataset.train_size = 300;
        cfg.dataset.test_size = 300;
        cfg.repeats = 2;
        cfg.model_samples = 300;
        AlgorithmSpec boosted;
        boosted.name = "boosted";
        boosted.kind = AlgorithmSpec::Kind::Adagan;
        boosted.T = 4;
        boosted.discriminator.mode = DiscriminatorMode::Classifier;
        cfg.algorithms = {boosted};
        const auto report = run_experiment(cfg);
        const std::string csv = plot_data_csv(report.to_json());
        std::istringstream lines(csv);
        std::string header;
        std::getline(lines, header);
        CHECK(std::count(header.begin(), header.end(), ',') == 3 + 4 - 1);  // 3 labels + T columns
        std::string row;
        std::getline(lines, row);
        CHECK(std::count(row.begin(), row.end(), ',') == 3 + 4 - 1);
    }

    TEST_CASE("config parsing rejects malformed input") {
        CHECK_THROWS_AS(experiment_config_from_json(nlohmann::json::object()), ConfigError);
        nlohmann::json j = {{"dataset", {{"modes", 0}}}};
        CHECK_THROWS_AS(experiment_config_from_json(j), ConfigError);
        nlohmann::json ok = {{"dataset", {{"modes", 2}, {"train_size", 100}, {"test_size", 100}}},
                             {"algorithms", {{{"variant", "adagan"}}}}};
        CHECK(experiment_config_from_json(ok).algorithms.size() == 1);
        nlohmann::json bad_alg = ok;
        bad_alg["algorithms"][0]["variant"] = "nonsense";
        CHECK_THROWS_AS(experiment_config_from_json(bad_alg), ConfigError);
    }

    TEST_CASE("weights demo emits one row per training point") {
        nlohmann::json cfg = {
            {"dataset",
             {{"modes", 2}, {"dataset_seed", 8}, {"train_size", 50}, {"test_size", 50}}},
            {"beta", 0.5},
            {"seed", 2},
            {"discriminator", {{"mode", "classifier"}}}};
        const std::string csv = weights_demo_csv(cfg);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);  // header + 50 rows
        CHECK(csv.rfind("index,x0,x1,d,h,w\n", 0) == 0);
    }
}
