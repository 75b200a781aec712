#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "adagan/rng.hpp"

namespace adagan {

// Probability vector over an indexed finite support. Operands of the
// divergence and solver routines must share support indexing.
class DiscreteDistribution {
  public:
    static constexpr double kNormalizationTol = 1e-12;

    explicit DiscreteDistribution(std::vector<double> masses) : masses_(std::move(masses)) {
        if (masses_.empty()) throw std::invalid_argument("distribution: empty support");
        double sum = 0.0;
        for (double m : masses_) {
            if (std::isnan(m)) throw std::invalid_argument("distribution: NaN mass");
            if (m < 0.0) throw std::invalid_argument("distribution: negative mass");
            sum += m;
        }
        if (std::abs(sum - 1.0) > kNormalizationTol)
            throw std::invalid_argument("distribution: masses sum to " + std::to_string(sum));
    }

    // Scales a nonnegative vector onto the simplex.
    static DiscreteDistribution normalized(std::vector<double> raw) {
        double sum = 0.0;
        for (double m : raw) {
            if (std::isnan(m) || m < 0.0)
                throw std::invalid_argument("distribution: invalid raw mass");
            sum += m;
        }
        if (sum <= 0.0) throw std::invalid_argument("distribution: zero total mass");
        for (double& m : raw) m /= sum;
        return DiscreteDistribution(std::move(raw));
    }

    static DiscreteDistribution uniform(std::size_t n) {
        return DiscreteDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    std::size_t size() const { return masses_.size(); }
    double operator[](std::size_t i) const { return masses_[i]; }
    const std::vector<double>& masses() const { return masses_; }

    bool same_support(const DiscreteDistribution& other) const { return size() == other.size(); }

  private:
    std::vector<double> masses_;
};

// Dirichlet(1)-equivalent simplex draw (normalized unit exponentials),
// with each atom zeroed with probability `zero_prob` to exercise the
// boundary conventions. Always leaves at least one positive atom.
inline DiscreteDistribution sample_distribution(Rng& rng, std::size_t support,
                                                double zero_prob = 0.0) {
    std::vector<double> raw(support);
    for (double& m : raw) m = rng.exponential();
    if (zero_prob > 0.0) {
        for (double& m : raw)
            if (rng.uniform01() < zero_prob) m = 0.0;
        bool any = false;
        for (double m : raw) any = any || m > 0.0;
        if (!any) raw[rng.uniform_index(support)] = 1.0;
    }
    return DiscreteDistribution::normalized(std::move(raw));
}

}  // namespace adagan
