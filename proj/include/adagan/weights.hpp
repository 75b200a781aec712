#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "adagan/divergence.hpp"
#include "adagan/optimal_target.hpp"

namespace adagan {

struct WeightUpdate {
    std::vector<double> weights;
    double lambda = 0.0;
    std::size_t active_count = 0;
};

// w_i = (p_i / beta)(lambda* - (1-beta) h(d_i))_+ with lambda* from the
// sorted-ratio solver; the returned weights sum to one by construction.
// Examples the current mixture already over-covers get weight zero.
inline WeightUpdate update_training_weights(const std::vector<double>& d_values,
                                            const std::vector<double>& p, double beta) {
    if (d_values.size() != p.size())
        throw std::invalid_argument("update_training_weights: length mismatch");
    std::vector<double> h(d_values.size());
    for (std::size_t i = 0; i < d_values.size(); ++i)
        h[i] = density_ratio_from_discriminator(d_values[i]);
    const auto sol = lambda_star_empirical(beta, p, h);
    const double gamma = 1.0 - beta;
    std::vector<double> w(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        w[i] = p[i] / beta * std::max(0.0, sol.lambda - gamma * h[i]);
    return {std::move(w), sol.lambda, sol.active_count};
}

struct BetaForRatio {
    double beta = 0.5;
    std::size_t positive_count = 0;
    bool exact = true;  // false when ties make the requested count unreachable
};

namespace detail {

inline std::size_t positive_weight_count(const std::vector<double>& d_values,
                                         const std::vector<double>& p, double beta) {
    const auto upd = update_training_weights(d_values, p, beta);
    std::size_t c = 0;
    for (double w : upd.weights)
        if (w > 0.0) ++c;
    return c;
}

}  // namespace detail

// The unique beta giving exactly ceil(N r) strictly positive weights, found
// by binary search; the positive count is nondecreasing in beta. When ties
// in h make that count unreachable the nearest achievable one is returned,
// flagged through `exact`.
inline BetaForRatio choose_beta_for_ratio(double r, const std::vector<double>& d_values,
                                          const std::vector<double>& p) {
    if (!(r > 0.0) || !(r < 1.0))
        throw std::invalid_argument("choose_beta_for_ratio: r must lie in (0, 1)");
    const std::size_t n = p.size();
    const std::size_t target =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(r * static_cast<double>(n))));

    // smallest beta with count >= k, to within 1e-9
    auto boundary = [&](std::size_t k) {
        double lo = 1e-12, hi = 1.0;
        if (detail::positive_weight_count(d_values, p, hi) < k) return 1.0;
        if (detail::positive_weight_count(d_values, p, lo) >= k) return lo;
        while (hi - lo > 1e-9) {
            const double mid = 0.5 * (lo + hi);
            (detail::positive_weight_count(d_values, p, mid) >= k ? hi : lo) = mid;
        }
        return hi;
    };

    const double lower = boundary(target);
    const double upper = target == n ? 1.0 : boundary(target + 1);
    const double beta = std::clamp(0.5 * (lower + upper), 1e-9, 1.0);
    const std::size_t achieved = detail::positive_weight_count(d_values, p, beta);
    if (achieved == target) return {beta, achieved, true};

    // the count jumped past the target; pick whichever side lands closer
    const double below = std::max(1e-9, lower - 1e-7);
    const double above = std::min(1.0, upper + 1e-7);
    const std::size_t c_below = detail::positive_weight_count(d_values, p, below);
    const std::size_t c_above = detail::positive_weight_count(d_values, p, above);
    auto dist = [&](std::size_t c) {
        return c > target ? c - target : target - c;
    };
    if (dist(c_below) < dist(c_above)) return {below, c_below, false};
    return {above, c_above, false};
}

// Mixture-weight schedules for the boosting loop.
struct BetaSchedule {
    enum class Kind { Constant, OneOverT, TopRatioConstant, TopRatioDecay, RatioFromThreshold };

    Kind kind = Kind::OneOverT;
    double beta = 0.5;       // Constant
    double ratio = 0.5;      // TopRatioConstant
    double c1 = 0.5;         // TopRatioDecay: r_t = c1 exp(-c2 t)
    double c2 = 0.1;
    double threshold = 1.0;  // RatioFromThreshold: tau on h(d)

    static BetaSchedule constant(double beta) {
        if (!(beta > 0.0) || beta > 1.0)
            throw std::invalid_argument("constant schedule: beta must lie in (0, 1]");
        BetaSchedule s;
        s.kind = Kind::Constant;
        s.beta = beta;
        return s;
    }
    static BetaSchedule one_over_t() { return {}; }
    static BetaSchedule top_ratio(double r) {
        if (!(r > 0.0) || !(r < 1.0))
            throw std::invalid_argument("top-ratio schedule: r must lie in (0, 1)");
        BetaSchedule s;
        s.kind = Kind::TopRatioConstant;
        s.ratio = r;
        return s;
    }
    static BetaSchedule top_ratio_decay(double c1, double c2) {
        if (!(c1 > 0.0) || !(c2 > 0.0))
            throw std::invalid_argument("decay schedule: constants must be positive");
        BetaSchedule s;
        s.kind = Kind::TopRatioDecay;
        s.c1 = c1;
        s.c2 = c2;
        return s;
    }
    static BetaSchedule ratio_from_threshold(double tau) {
        if (!(tau > 0.0))
            throw std::invalid_argument("threshold schedule: tau must be positive");
        BetaSchedule s;
        s.kind = Kind::RatioFromThreshold;
        s.threshold = tau;
        return s;
    }

    // Resolve beta_t; the ratio-driven variants need the current
    // discriminator values.
    double evaluate(int t, const std::vector<double>& d_values,
                    const std::vector<double>& p) const {
        switch (kind) {
            case Kind::Constant:
                return beta;
            case Kind::OneOverT:
                return 1.0 / static_cast<double>(t);
            case Kind::TopRatioConstant:
                return choose_beta_for_ratio(ratio, d_values, p).beta;
            case Kind::TopRatioDecay: {
                const double n = static_cast<double>(p.size());
                const double r = std::clamp(c1 * std::exp(-c2 * t), 1.0 / n, 1.0 - 1.0 / n);
                return choose_beta_for_ratio(r, d_values, p).beta;
            }
            case Kind::RatioFromThreshold: {
                const double n = static_cast<double>(p.size());
                double above = 0.0;
                for (double d : d_values)
                    if (density_ratio_from_discriminator(d) > threshold) above += 1.0;
                const double r = std::clamp(above / n, 1.0 / n, 1.0 - 1.0 / n);
                return choose_beta_for_ratio(r, d_values, p).beta;
            }
        }
        return 0.5;
    }
};

}  // namespace adagan
