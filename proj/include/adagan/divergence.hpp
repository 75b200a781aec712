#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "adagan/distribution.hpp"

namespace adagan {

enum class FDivergenceKind {
    KullbackLeibler,
    ReverseKullbackLeibler,
    JensenShannon,
    TotalVariation,
    SquaredHellinger,
};

constexpr std::array<FDivergenceKind, 5> kAllDivergenceKinds = {
    FDivergenceKind::KullbackLeibler,   FDivergenceKind::ReverseKullbackLeibler,
    FDivergenceKind::JensenShannon,     FDivergenceKind::TotalVariation,
    FDivergenceKind::SquaredHellinger,
};

constexpr std::array<FDivergenceKind, 3> kHilbertianKinds = {
    FDivergenceKind::JensenShannon,
    FDivergenceKind::TotalVariation,
    FDivergenceKind::SquaredHellinger,
};

// Scalar maps defining each divergence: the generator f (convex, f(1)=0),
// its normalized representative f0(u) = f(u) - (u-1) f'(1), the conjugate
// direction f°(u) = u f(1/u), and the analytic limits at 0 (possibly +inf).
// Natural logarithm throughout.
class FDivergence {
  public:
    explicit constexpr FDivergence(FDivergenceKind kind) : kind_(kind) {}

    static constexpr double inf() { return std::numeric_limits<double>::infinity(); }

    FDivergenceKind kind() const { return kind_; }

    const char* name() const {
        switch (kind_) {
            case FDivergenceKind::KullbackLeibler: return "kl";
            case FDivergenceKind::ReverseKullbackLeibler: return "reverse_kl";
            case FDivergenceKind::JensenShannon: return "js";
            case FDivergenceKind::TotalVariation: return "tv";
            case FDivergenceKind::SquaredHellinger: return "hellinger2";
        }
        return "?";
    }

    bool hilbertian() const {
        return kind_ == FDivergenceKind::JensenShannon ||
               kind_ == FDivergenceKind::TotalVariation ||
               kind_ == FDivergenceKind::SquaredHellinger;
    }

    double f(double u) const {
        switch (kind_) {
            case FDivergenceKind::KullbackLeibler: return -std::log(u);
            case FDivergenceKind::ReverseKullbackLeibler: return u * std::log(u);
            case FDivergenceKind::JensenShannon:
                return u * std::log(u) - (u + 1.0) * std::log(0.5 * (u + 1.0));
            case FDivergenceKind::TotalVariation: return std::abs(u - 1.0);
            case FDivergenceKind::SquaredHellinger: {
                const double s = std::sqrt(u) - 1.0;
                return s * s;
            }
        }
        return 0.0;
    }

    // Subderivative of f at 1 (0 chosen for total variation).
    double fprime1() const {
        switch (kind_) {
            case FDivergenceKind::KullbackLeibler: return -1.0;
            case FDivergenceKind::ReverseKullbackLeibler: return 1.0;
            default: return 0.0;
        }
    }

    double f0(double u) const { return f(u) - (u - 1.0) * fprime1(); }

    double fconj(double u) const {
        switch (kind_) {
            case FDivergenceKind::KullbackLeibler: return u * std::log(u);
            case FDivergenceKind::ReverseKullbackLeibler: return -std::log(u);
            default: return f(u);  // symmetric kinds
        }
    }

    double f_at0() const {
        switch (kind_) {
            case FDivergenceKind::KullbackLeibler: return inf();
            case FDivergenceKind::ReverseKullbackLeibler: return 0.0;
            case FDivergenceKind::JensenShannon: return std::log(2.0);
            default: return 1.0;
        }
    }

    double fconj_at0() const {
        switch (kind_) {
            case FDivergenceKind::KullbackLeibler: return 0.0;
            case FDivergenceKind::ReverseKullbackLeibler: return inf();
            case FDivergenceKind::JensenShannon: return std::log(2.0);
            default: return 1.0;
        }
    }

    double f0_at0() const { return f_at0() + fprime1(); }
    double f0conj_at0() const { return fconj_at0() - fprime1(); }

  private:
    FDivergenceKind kind_;
};

namespace detail {

// Sum over the shared support with the extended-value convention: atoms
// where one side vanishes contribute through the precomputed limits so no
// 0 * log 0 is ever evaluated.
template <typename F>
inline double f_div_sum(const std::vector<double>& q, const std::vector<double>& p, F&& fmap,
                        double at0_q, double at0_p) {
    double acc = 0.0;
    double q_zero_mass = 0.0;  // P-mass where dQ = 0
    double p_zero_mass = 0.0;  // Q-mass where dP = 0
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (p[i] > 0.0 && q[i] > 0.0) {
            acc += p[i] * fmap(q[i] / p[i]);
        } else if (p[i] > 0.0) {
            q_zero_mass += p[i];
        } else if (q[i] > 0.0) {
            p_zero_mass += q[i];
        }
    }
    if (q_zero_mass > 0.0) acc += at0_q * q_zero_mass;
    if (p_zero_mass > 0.0) acc += at0_p * p_zero_mass;
    if (acc < 0.0 && acc > -1e-9) acc = 0.0;  // accumulation noise near identity
    return acc;
}

inline void check_support(const DiscreteDistribution& a, const DiscreteDistribution& b) {
    if (!a.same_support(b))
        throw std::invalid_argument("f_divergence: mismatched support lengths");
}

}  // namespace detail

// D_f(Q || P) on a shared finite support.
inline double f_divergence(FDivergenceKind kind, const DiscreteDistribution& q,
                           const DiscreteDistribution& p) {
    detail::check_support(q, p);
    const FDivergence d(kind);
    return detail::f_div_sum(q.masses(), p.masses(), [&d](double u) { return d.f(u); },
                             d.f_at0(), d.fconj_at0());
}

// Same divergence evaluated through the normalized representative f0;
// equals f_divergence for every pair (testable identity).
inline double f0_divergence(FDivergenceKind kind, const DiscreteDistribution& q,
                            const DiscreteDistribution& p) {
    detail::check_support(q, p);
    const FDivergence d(kind);
    return detail::f_div_sum(q.masses(), p.masses(), [&d](double u) { return d.f0(u); },
                             d.f0_at0(), d.f0conj_at0());
}

// D_{f°}(Q || P); equals D_f(P || Q) for every pair (testable identity).
inline double fconj_divergence(FDivergenceKind kind, const DiscreteDistribution& q,
                               const DiscreteDistribution& p) {
    detail::check_support(q, p);
    const FDivergence d(kind);
    return detail::f_div_sum(q.masses(), p.masses(), [&d](double u) { return d.fconj(u); },
                             d.fconj_at0(), d.f_at0());
}

// Jensen-Shannon via its two routes: the direct f-divergence and the sum
// KL(Q || M) + KL(P || M) with M = (P+Q)/2. The two must agree to 1e-10.
inline std::pair<double, double> js_decomposition_check(const DiscreteDistribution& p,
                                                        const DiscreteDistribution& q) {
    detail::check_support(p, q);
    const double direct = f_divergence(FDivergenceKind::JensenShannon, p, q);
    double kl_sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (q[i] > 0.0) kl_sum += q[i] * std::log(q[i] / m);
        if (p[i] > 0.0) kl_sum += p[i] * std::log(p[i] / m);
    }
    if (kl_sum < 0.0 && kl_sum > -1e-12) kl_sum = 0.0;
    return {direct, kl_sum};
}

constexpr double kDiscriminatorClamp = 1e-6;

// h(D) = (1-D)/D, the map from a probabilistic discriminator output to the
// density ratio dP_g/dP_d. Inputs are clamped away from {0,1} because
// empirical classifiers can saturate, which would blow up the lambda solver.
inline double density_ratio_from_discriminator(double d) {
    if (std::isnan(d)) throw std::invalid_argument("density_ratio: NaN discriminator value");
    const double c = std::min(1.0 - kDiscriminatorClamp, std::max(kDiscriminatorClamp, d));
    return (1.0 - c) / c;
}

}  // namespace adagan
