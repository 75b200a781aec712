#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "adagan/boosting.hpp"
#include "adagan/em.hpp"
#include "adagan/generator.hpp"
#include "adagan/mixture.hpp"
#include "adagan/rng.hpp"
#include "adagan/sample.hpp"

using namespace adagan;

namespace {

Points standard_normal_points(Eigen::Index n, Eigen::Index d, Rng& rng) {
    Points p(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) p(i, j) = rng.normal();
    return p;
}

// 2-d trapezoid quadrature of the density over a box around the mean.
double integrate_density_2d(const Generator& g, double half_width, int cells) {
    const double step = 2.0 * half_width / cells;
    double acc = 0.0;
    Eigen::VectorXd x(2);
    for (int i = 0; i < cells; ++i) {
        x[0] = -half_width + (i + 0.5) * step;
        for (int j = 0; j < cells; ++j) {
            x[1] = -half_width + (j + 0.5) * step;
            acc += std::exp(g.log_density(x)) * step * step;
        }
    }
    return acc;
}

}  // namespace

TEST_SUITE("gaussian") {
    TEST_CASE("weighted mean honours the weights") {
        Points pts(2, 2);
        pts << 0, 0, 2, 0;
        auto even = fit_gaussian(WeightedSample(pts, Eigen::Vector2d(0.5, 0.5)));
        CHECK(even.mean()[0] == doctest::Approx(1.0));
        CHECK(even.mean()[1] == doctest::Approx(0.0));

        // zero-weight points are excluded entirely
        auto skewed = fit_gaussian(WeightedSample(pts, Eigen::Vector2d(1.0, 0.0)));
        CHECK(skewed.mean()[0] == doctest::Approx(0.0));
        CHECK(skewed.mean()[1] == doctest::Approx(0.0));
    }

    TEST_CASE("large-sample fit recovers the standard normal") {
        Rng rng(21);
        const auto pts = standard_normal_points(10000, 2, rng);
        const auto g = fit_gaussian(WeightedSample::uniform(pts));
        CHECK(g.mean().norm() <= 0.05);
        CHECK((g.covariance() - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 0.1);
        // density integrates to one
        CHECK(integrate_density_2d(g, 8.0, 400) == doctest::Approx(1.0).epsilon(0.02));
    }

    TEST_CASE("log density of the standard normal at the origin") {
        const GaussianGenerator g(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
        Eigen::VectorXd x(1);
        x << 0.0;
        CHECK(g.log_density(x) ==
              doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-12));
    }

    TEST_CASE("sampling matches the fitted moments") {
        Eigen::VectorXd mean(2);
        mean << 3.0, -1.0;
        Eigen::MatrixXd cov(2, 2);
        cov << 2.0, 0.6, 0.6, 1.0;
        const GaussianGenerator g(mean, cov);
        Rng rng(22);
        const Points s = g.sample(20000, rng);
        CHECK((s.colwise().mean().transpose() - mean).norm() <= 0.05);
        const Eigen::MatrixXd centered = s.rowwise() - s.colwise().mean();
        const Eigen::MatrixXd emp = centered.transpose() * centered / (s.rows() - 1.0);
        CHECK((emp - cov).cwiseAbs().maxCoeff() <= 0.1);
    }
}

TEST_SUITE("mixture") {
    TEST_CASE("adding with beta = 1 replaces the mixture") {
        auto a = std::make_shared<GaussianGenerator>(Eigen::VectorXd::Zero(1),
                                                     Eigen::MatrixXd::Identity(1, 1));
        auto b = std::make_shared<GaussianGenerator>(Eigen::VectorXd::Constant(1, 5.0),
                                                     Eigen::MatrixXd::Identity(1, 1));
        const auto m = mixture_add_component(GeneratorMixture::single(a), b, 1.0);
        CHECK(m.alphas()[0] == doctest::Approx(0.0));
        CHECK(m.alphas()[1] == doctest::Approx(1.0));

        const auto half = mixture_add_component(GeneratorMixture::single(a), b, 0.5);
        CHECK(half.alphas()[0] == doctest::Approx(0.5));
        CHECK(half.alphas()[1] == doctest::Approx(0.5));

        CHECK_THROWS_AS(mixture_add_component(GeneratorMixture::single(a), b, 0.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(mixture_add_component(GeneratorMixture::single(a), b, 1.5),
                        std::invalid_argument);
    }

    TEST_CASE("beta_t = 1/t yields equal final weights") {
        auto comp = std::make_shared<GaussianGenerator>(Eigen::VectorXd::Zero(1),
                                                        Eigen::MatrixXd::Identity(1, 1));
        GeneratorMixture m = GeneratorMixture::single(comp);
        const int T = 7;
        for (int t = 2; t <= T; ++t) m = mixture_add_component(m, comp, 1.0 / t);
        REQUIRE(m.alphas().size() == T);
        double sum = 0.0;
        for (double a : m.alphas()) {
            CHECK(a == doctest::Approx(1.0 / T).epsilon(1e-12));
            sum += a;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }

    TEST_CASE("sampling follows the component weights") {
        auto left = std::make_shared<GaussianGenerator>(Eigen::VectorXd::Constant(1, -50.0),
                                                        Eigen::MatrixXd::Identity(1, 1));
        auto right = std::make_shared<GaussianGenerator>(Eigen::VectorXd::Constant(1, 50.0),
                                                         Eigen::MatrixXd::Identity(1, 1));
        Rng rng(23);
        const GeneratorMixture only_left({left, right}, {1.0, 0.0});
        const Points s = only_left.sample(200, rng);
        CHECK((s.array() < 0).all());

        CHECK(only_left.sample(0, rng).rows() == 0);

        const GeneratorMixture even({left, right}, {0.5, 0.5});
        const Points e = even.sample(10000, rng);
        const double left_frac = (e.array() < 0).cast<double>().mean();
        CHECK(left_frac == doctest::Approx(0.5).epsilon(0.04));
    }

    TEST_CASE("log density degenerate cases") {
        auto std1 = std::make_shared<GaussianGenerator>(Eigen::VectorXd::Zero(1),
                                                        Eigen::MatrixXd::Identity(1, 1));
        Eigen::VectorXd x(1);
        x << 0.0;
        const GeneratorMixture single({std1}, {1.0});
        CHECK(single.log_density(x) ==
              doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-12));

        auto other = std::make_shared<GaussianGenerator>(Eigen::VectorXd::Constant(1, 9.0),
                                                         Eigen::MatrixXd::Identity(1, 1));
        const GeneratorMixture winner_takes_all({std1, other}, {1.0, 0.0});
        CHECK(winner_takes_all.log_density(x) == doctest::Approx(std1->log_density(x)));

        const GeneratorMixture duplicated({std1, std1}, {0.3, 0.7});
        CHECK(duplicated.log_density(x) == doctest::Approx(std1->log_density(x)).epsilon(1e-12));
    }

    TEST_CASE("alpha bookkeeping survives any update sequence") {
        auto comp = std::make_shared<GaussianGenerator>(Eigen::VectorXd::Zero(1),
                                                        Eigen::MatrixXd::Identity(1, 1));
        Rng rng(30);
        GeneratorMixture m = GeneratorMixture::single(comp);
        for (int step = 0; step < 200; ++step) {
            m = mixture_add_component(m, comp, rng.uniform(1e-3, 1.0));
            double sum = 0.0;
            for (double a : m.alphas()) {
                CHECK(a >= 0.0);
                sum += a;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
    }

    TEST_CASE("mixture density integrates to one") {
        Eigen::MatrixXd cov(2, 2);
        cov << 1.2, 0.4, 0.4, 0.9;
        auto a = std::make_shared<GaussianGenerator>(Eigen::Vector2d(-2.0, 1.0), cov);
        auto b = std::make_shared<GaussianGenerator>(Eigen::Vector2d(3.0, -1.5),
                                                     0.5 * Eigen::Matrix2d::Identity());
        const GeneratorMixture m({a, b}, {0.6, 0.4});
        CHECK(integrate_density_2d(m, 12.0, 600) == doctest::Approx(1.0).epsilon(0.02));
    }

    TEST_CASE("serialization round trip preserves the density") {
        Rng rng(24);
        Eigen::MatrixXd cov(2, 2);
        cov << 1.5, -0.3, -0.3, 0.8;
        auto a = std::make_shared<GaussianGenerator>(Eigen::Vector2d(1.0, 2.0), cov);
        auto b = std::make_shared<GaussianGenerator>(Eigen::Vector2d(-3.0, 0.5),
                                                     Eigen::Matrix2d::Identity());
        const GeneratorMixture m({a, b}, {0.4, 0.6});
        const auto restored = generator_from_json(m.to_json());
        for (int it = 0; it < 200; ++it) {
            Eigen::VectorXd x(2);
            x << rng.uniform(-6, 6), rng.uniform(-6, 6);
            CHECK(restored->log_density(x) == doctest::Approx(m.log_density(x)).epsilon(1e-12));
        }
    }
}

TEST_SUITE("em") {
    TEST_CASE("one component reduces to the weighted Gaussian fit") {
        Rng rng(25);
        const auto pts = standard_normal_points(500, 2, rng);
        Eigen::VectorXd w(500);
        for (Eigen::Index i = 0; i < 500; ++i) w[i] = rng.uniform(0.1, 1.0);
        w /= w.sum();
        const WeightedSample sample(pts, w);
        const auto em = fit_gaussian_mixture_em(sample, 1, 1, rng);
        const auto direct = fit_gaussian(sample);
        const auto* mix = dynamic_cast<const GeneratorMixture*>(em.model.get());
        REQUIRE(mix != nullptr);
        const auto* comp = dynamic_cast<const GaussianGenerator*>(mix->components()[0].get());
        REQUIRE(comp != nullptr);
        CHECK((comp->mean() - direct.mean()).norm() <= 1e-6);
        CHECK((comp->covariance() - direct.covariance()).cwiseAbs().maxCoeff() <= 1e-6);
    }

    TEST_CASE("two well-separated clusters are recovered") {
        Rng rng(26);
        Points pts(1200, 2);
        for (Eigen::Index i = 0; i < 600; ++i) {
            pts(i, 0) = -10.0 + rng.normal();
            pts(i, 1) = rng.normal();
            pts(600 + i, 0) = 10.0 + rng.normal();
            pts(600 + i, 1) = rng.normal();
        }
        const auto em = fit_gaussian_mixture_em(WeightedSample::uniform(pts), 2, 3, rng);
        const auto* mix = dynamic_cast<const GeneratorMixture*>(em.model.get());
        REQUIRE(mix != nullptr);
        std::vector<double> centers;
        for (const auto& c : mix->components())
            centers.push_back(dynamic_cast<const GaussianGenerator*>(c.get())->mean()[0]);
        std::sort(centers.begin(), centers.end());
        CHECK(centers[0] == doctest::Approx(-10.0).epsilon(0.02));
        CHECK(centers[1] == doctest::Approx(10.0).epsilon(0.02));

        // log-likelihood never decreases
        for (std::size_t i = 1; i < em.loglik_path.size(); ++i)
            CHECK(em.loglik_path[i] >= em.loglik_path[i - 1] - 1e-8);
    }

    TEST_CASE("weights can silence one cluster") {
        Rng rng(27);
        Points pts(800, 2);
        Eigen::VectorXd w(800);
        for (Eigen::Index i = 0; i < 400; ++i) {
            pts(i, 0) = -10.0 + rng.normal();
            pts(i, 1) = rng.normal();
            w[i] = 1.0;
            pts(400 + i, 0) = 10.0 + rng.normal();
            pts(400 + i, 1) = rng.normal();
            w[400 + i] = 0.0;
        }
        w /= w.sum();
        const auto em = fit_gaussian_mixture_em(WeightedSample(pts, w), 2, 2, rng);
        // the weighted likelihood only sees the left cluster; the mean log
        // density there must reach the analytic standard-normal value
        double mean_ll = 0.0;
        for (Eigen::Index i = 0; i < 400; ++i) mean_ll += em.model->log_density(pts.row(i));
        mean_ll /= 400.0;
        const double analytic = -(1.0 + std::log(2.0 * std::numbers::pi));
        CHECK(mean_ll >= analytic - 0.1);
    }

    TEST_CASE("rejects k < 1 and starving samples") {
        Rng rng(28);
        const auto pts = standard_normal_points(50, 2, rng);
        CHECK_THROWS_AS(fit_gaussian_mixture_em(WeightedSample::uniform(pts), 0, 1, rng),
                        std::invalid_argument);
        Eigen::VectorXd w = Eigen::VectorXd::Zero(50);
        w[0] = w[1] = 0.5;
        CHECK_THROWS_AS(fit_gaussian_mixture_em(WeightedSample(pts, w), 2, 1, rng), FitError);
    }
}

TEST_SUITE("weighted_sample") {
    TEST_CASE("validation") {
        Points pts(2, 1);
        pts << 0, 1;
        CHECK_THROWS_AS(WeightedSample(pts, Eigen::Vector2d(0.5, 0.4)), std::invalid_argument);
        CHECK_THROWS_AS(WeightedSample(pts, Eigen::Vector2d(-0.1, 1.1)), std::invalid_argument);
        CHECK_THROWS_AS(WeightedSample(Points(0, 1), Eigen::VectorXd()), std::invalid_argument);
    }

    TEST_CASE("resampled fitting tracks the weighted fit") {
        Rng rng(61);
        Points pts(4000, 2);
        Eigen::VectorXd w(4000);
        for (Eigen::Index i = 0; i < 4000; ++i) {
            pts(i, 0) = (i % 2 == 0 ? -3.0 : 3.0) + rng.normal();
            pts(i, 1) = rng.normal();
            w[i] = i % 2 == 0 ? 1.0 : 0.25;  // favour the left cluster
        }
        w /= w.sum();
        LearnerConfig direct;
        LearnerConfig via_resample;
        via_resample.resample_fit = true;
        Rng r1(62), r2(62);
        const auto g1 = fit_weak_learner(WeightedSample(pts, w), direct, r1);
        const auto g2 = fit_weak_learner(WeightedSample(pts, w), via_resample, r2);
        const auto* d1 = dynamic_cast<const GaussianGenerator*>(g1.get());
        const auto* d2 = dynamic_cast<const GaussianGenerator*>(g2.get());
        REQUIRE(d1 != nullptr);
        REQUIRE(d2 != nullptr);
        CHECK((d1->mean() - d2->mean()).norm() <= 0.2);
    }

    TEST_CASE("resampling concentrates on heavy points") {
        Rng rng(29);
        Points pts(3, 1);
        pts << 0, 1, 2;
        Eigen::VectorXd w(3);
        w << 0.9, 0.1, 0.0;
        const auto r = resample(WeightedSample(pts, w), 5000, rng);
        const double zero_frac = (r.points.array() == 0.0).cast<double>().mean();
        CHECK(zero_frac == doctest::Approx(0.9).epsilon(0.03));
        CHECK((r.points.array() != 2.0).all());
    }
}
