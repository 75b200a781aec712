#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "adagan/generator.hpp"

namespace adagan {

// Additive mixture of generators with weights alpha_i summing to one.
// Components are shared immutably, so extending a mixture is cheap.
class GeneratorMixture final : public Generator {
  public:
    GeneratorMixture(std::vector<GeneratorPtr> components, std::vector<double> alphas)
        : components_(std::move(components)), alphas_(std::move(alphas)) {
        if (components_.empty() || components_.size() != alphas_.size())
            throw std::invalid_argument("mixture: component/alpha count mismatch");
        double sum = 0.0;
        for (double a : alphas_) {
            if (std::isnan(a) || a < 0.0) throw std::invalid_argument("mixture: invalid alpha");
            sum += a;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("mixture: alphas must sum to 1");
        for (const auto& c : components_) {
            if (!c) throw std::invalid_argument("mixture: null component");
            if (c->dim() != components_.front()->dim())
                throw std::invalid_argument("mixture: component dimension mismatch");
        }
    }

    static GeneratorMixture single(GeneratorPtr g) {
        std::vector<GeneratorPtr> c{std::move(g)};
        return GeneratorMixture(std::move(c), {1.0});
    }

    Eigen::Index dim() const override { return components_.front()->dim(); }
    std::size_t component_count() const { return components_.size(); }
    const std::vector<double>& alphas() const { return alphas_; }
    const std::vector<GeneratorPtr>& components() const { return components_; }

    // Two-step sampling: component index from the alphas, then the component.
    Points sample(Eigen::Index n, Rng& rng) const override {
        Points out(n, dim());
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::size_t k = sample_categorical(rng, alphas_);
            out.row(i) = components_[k]->sample(1, rng).row(0);
        }
        return out;
    }

    // log sum_k alpha_k exp(log p_k(x)), evaluated stably.
    double log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
        if (x.size() != dim()) throw std::invalid_argument("mixture: dimension mismatch");
        double max_term = -std::numeric_limits<double>::infinity();
        std::vector<double> terms(components_.size(),
                                  -std::numeric_limits<double>::infinity());
        for (std::size_t k = 0; k < components_.size(); ++k) {
            if (alphas_[k] == 0.0) continue;
            terms[k] = std::log(alphas_[k]) + components_[k]->log_density(x);
            max_term = std::max(max_term, terms[k]);
        }
        if (!std::isfinite(max_term)) return -std::numeric_limits<double>::infinity();
        double acc = 0.0;
        for (double t : terms)
            if (std::isfinite(t)) acc += std::exp(t - max_term);
        return max_term + std::log(acc);
    }

    nlohmann::ordered_json to_json() const override {
        nlohmann::ordered_json j;
        j["type"] = "mixture";
        j["alphas"] = alphas_;
        j["components"] = nlohmann::ordered_json::array();
        for (const auto& c : components_) j["components"].push_back(c->to_json());
        return j;
    }

  private:
    std::vector<GeneratorPtr> components_;
    std::vector<double> alphas_;
};

// G_{t} = (1-beta) G_{t-1} + beta g: old alphas shrink by (1-beta) and the
// new component enters with weight beta.
inline GeneratorMixture mixture_add_component(const GeneratorMixture& mixture, GeneratorPtr g,
                                              double beta) {
    if (!(beta > 0.0) || beta > 1.0)
        throw std::invalid_argument("mixture_add_component: beta must lie in (0, 1]");
    std::vector<GeneratorPtr> comps = mixture.components();
    std::vector<double> alphas = mixture.alphas();
    for (double& a : alphas) a *= 1.0 - beta;
    comps.push_back(std::move(g));
    alphas.push_back(beta);
    // keep the invariant exact against repeated rescaling drift
    double sum = 0.0;
    for (double a : alphas) sum += a;
    for (double& a : alphas) a /= sum;
    return GeneratorMixture(std::move(comps), std::move(alphas));
}

inline Points mixture_sample(const GeneratorMixture& mixture, Eigen::Index n, Rng& rng) {
    return mixture.sample(n, rng);
}

inline double mixture_log_density(const GeneratorMixture& mixture,
                                  const Eigen::Ref<const Eigen::VectorXd>& x) {
    return mixture.log_density(x);
}

// Reconstructs a generator from its serialized form.
inline GeneratorPtr generator_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "gaussian") {
        const auto mean_v = j.at("mean").get<std::vector<double>>();
        Eigen::VectorXd mean(mean_v.size());
        for (std::size_t i = 0; i < mean_v.size(); ++i) mean[static_cast<Eigen::Index>(i)] = mean_v[i];
        const auto rows = j.at("cov");
        Eigen::MatrixXd cov(rows.size(), rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto row = rows[r].get<std::vector<double>>();
            if (row.size() != rows.size())
                throw std::invalid_argument("generator_from_json: covariance not square");
            for (std::size_t c = 0; c < row.size(); ++c)
                cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
        }
        return std::make_shared<GaussianGenerator>(std::move(mean), std::move(cov));
    }
    if (type == "mixture") {
        std::vector<GeneratorPtr> comps;
        for (const auto& c : j.at("components")) comps.push_back(generator_from_json(c));
        return std::make_shared<GeneratorMixture>(std::move(comps),
                                                  j.at("alphas").get<std::vector<double>>());
    }
    throw std::invalid_argument("generator_from_json: unknown type " + type);
}

}  // namespace adagan
