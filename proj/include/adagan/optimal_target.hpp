#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adagan/distribution.hpp"
#include "adagan/divergence.hpp"

namespace adagan {

// Raised when the surrogate target is requested on an instance where the
// current model misses more data mass than the mixture weight admits.
class InfeasibleError : public std::runtime_error {
  public:
    InfeasibleError(double missing_mass, double beta)
        : std::runtime_error("surrogate target infeasible: P_d(dP_g = 0) = " +
                             std::to_string(missing_mass) + " >= beta = " + std::to_string(beta)),
          missing_mass_(missing_mass),
          beta_(beta) {}

    double missing_mass() const { return missing_mass_; }
    double beta() const { return beta_; }

  private:
    double missing_mass_;
    double beta_;
};

struct OptimalTargetResult {
    double lambda = 0.0;
    DiscreteDistribution target;
    std::vector<std::size_t> active_set;  // atoms carrying positive target mass
};

namespace detail {

inline void check_beta(double beta) {
    if (!(beta > 0.0) || beta > 1.0)
        throw std::invalid_argument("beta must lie in (0, 1], got " + std::to_string(beta));
}

inline void check_pair(const DiscreteDistribution& a, const DiscreteDistribution& b) {
    if (!a.same_support(b)) throw std::invalid_argument("mismatched support lengths");
}

}  // namespace detail

// g(lambda) = sum_i (lambda p_d_i - (1-beta) p_g_i)_+ . Nonnegative, convex,
// nondecreasing, piecewise linear; g(lambda*) = beta defines the optimal
// normalization multiplier.
inline double g_lambda(double lambda, double beta, const DiscreteDistribution& p_d,
                       const DiscreteDistribution& p_g) {
    detail::check_beta(beta);
    detail::check_pair(p_d, p_g);
    const double gamma = 1.0 - beta;
    double acc = 0.0;
    for (std::size_t i = 0; i < p_d.size(); ++i)
        acc += std::max(0.0, lambda * p_d[i] - gamma * p_g[i]);
    return acc;
}

namespace detail {

inline OptimalTargetResult make_target_star(double lambda, double beta,
                                            const DiscreteDistribution& p_d,
                                            const DiscreteDistribution& p_g) {
    const double gamma = 1.0 - beta;
    std::vector<double> mass(p_d.size(), 0.0);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < p_d.size(); ++i) {
        const double m = (lambda * p_d[i] - gamma * p_g[i]) / beta;
        if (m > 0.0) {
            mass[i] = m;
            active.push_back(i);
        }
    }
    return {lambda, DiscreteDistribution::normalized(std::move(mass)), std::move(active)};
}

}  // namespace detail

// Bisection route for g(lambda) = beta, kept as an independent cross-check
// of the exact piecewise-linear sweep.
inline double solve_lambda_star_bisection(double beta, const DiscreteDistribution& p_d,
                                          const DiscreteDistribution& p_g, double tol = 1e-12) {
    detail::check_beta(beta);
    detail::check_pair(p_d, p_g);
    double lo = 0.0, hi = 1.0;
    while (g_lambda(hi, beta, p_d, p_g) < beta) hi *= 2.0;  // guards float shortfall at 1
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (g_lambda(mid, beta, p_d, p_g) < beta ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Optimal next mixture component: the distribution with density
// (1/beta)(lambda* dP_d - (1-beta) dP_g)_+ where lambda* solves
// g(lambda) = beta. Solved exactly by piecewise-linear inversion over the
// sorted breakpoints (1-beta) p_g_i / p_d_i.
inline OptimalTargetResult solve_lambda_star(double beta, const DiscreteDistribution& p_d,
                                             const DiscreteDistribution& p_g) {
    detail::check_beta(beta);
    detail::check_pair(p_d, p_g);
    const double gamma = 1.0 - beta;
    const std::size_t n = p_d.size();

    struct Atom {
        double breakpoint;
        double pd;
        double pg;
    };
    std::vector<Atom> atoms;
    atoms.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (p_d[i] > 0.0) atoms.push_back({gamma * p_g[i] / p_d[i], p_d[i], p_g[i]});
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.breakpoint < b.breakpoint; });

    // On the segment past the k-th distinct breakpoint, g is linear with
    // slope sum of included p_d; invert g = beta there and accept the first
    // segment containing its own solution.
    double sum_pd = 0.0;
    double sum_pg = 0.0;
    std::size_t i = 0;
    while (i < atoms.size()) {
        const double b = atoms[i].breakpoint;
        while (i < atoms.size() && atoms[i].breakpoint == b) {
            sum_pd += atoms[i].pd;
            sum_pg += atoms[i].pg;
            ++i;
        }
        const double next_b =
            i < atoms.size() ? atoms[i].breakpoint : std::numeric_limits<double>::infinity();
        const double lambda = (beta + gamma * sum_pg) / sum_pd;
        const double slack = 1e-12 * std::max(1.0, b);
        if (lambda >= b - slack && lambda <= next_b + slack)
            return detail::make_target_star(lambda, beta, p_d, p_g);
    }
    // Only reachable through pathological rounding at a breakpoint tie.
    return detail::make_target_star(solve_lambda_star_bisection(beta, p_d, p_g), beta, p_d, p_g);
}

// Optimizer of the surrogate objective: density
// (1/beta)(dP_d - lambda† (1-beta) dP_g)_+ with lambda† >= 1 solving
// sum_i (p_d_i - lambda (1-beta) p_g_i)_+ = beta. Requires the current model
// to miss less than beta of the data mass.
inline OptimalTargetResult solve_lambda_dagger(double beta, const DiscreteDistribution& p_d,
                                               const DiscreteDistribution& p_g) {
    detail::check_beta(beta);
    detail::check_pair(p_d, p_g);
    const std::size_t n = p_d.size();

    double missing = 0.0;  // P_d(dP_g = 0)
    for (std::size_t i = 0; i < n; ++i)
        if (p_g[i] == 0.0) missing += p_d[i];
    if (missing >= beta) throw InfeasibleError(missing, beta);

    auto finish = [&](double lambda) {
        const double gamma = 1.0 - beta;
        std::vector<double> mass(n, 0.0);
        std::vector<std::size_t> active;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = (p_d[i] - lambda * gamma * p_g[i]) / beta;
            if (m > 0.0) {
                mass[i] = m;
                active.push_back(i);
            }
        }
        return OptimalTargetResult{lambda, DiscreteDistribution::normalized(std::move(mass)),
                                   std::move(active)};
    };

    if (beta == 1.0) return finish(1.0);

    const double gamma = 1.0 - beta;
    struct Atom {
        double breakpoint;
        double pd;
        double pg;
    };
    std::vector<Atom> atoms;
    atoms.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (p_g[i] > 0.0) atoms.push_back({p_d[i] / (gamma * p_g[i]), p_d[i], p_g[i]});
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.breakpoint < b.breakpoint; });

    // H(lambda) = missing + sum over atoms with breakpoint > lambda of
    // (p_d_i - lambda gamma p_g_i); nonincreasing, piecewise linear. Sweep
    // segments left to right, shrinking the active suffix.
    double tail_pd = 0.0;
    double tail_pg = 0.0;
    for (const Atom& a : atoms) {
        tail_pd += a.pd;
        tail_pg += a.pg;
    }
    double lo = 0.0;
    std::size_t i = 0;
    while (i <= atoms.size()) {
        const double hi =
            i < atoms.size() ? atoms[i].breakpoint : std::numeric_limits<double>::infinity();
        if (tail_pg > 0.0) {
            const double lambda = (missing + tail_pd - beta) / (gamma * tail_pg);
            const double slack = 1e-12 * std::max(1.0, lo);
            if (lambda >= lo - slack && lambda <= hi + slack) return finish(std::max(lambda, lo));
        }
        if (i == atoms.size()) break;
        lo = atoms[i].breakpoint;
        while (i < atoms.size() && atoms[i].breakpoint == lo) {
            tail_pd -= atoms[i].pd;
            tail_pg -= atoms[i].pg;
            ++i;
        }
    }
    // Only reachable through pathological rounding at a breakpoint tie.
    auto big_h = [&](double lambda) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            acc += std::max(0.0, p_d[j] - lambda * gamma * p_g[j]);
        return acc;
    };
    double blo = 0.0, bhi = atoms.empty() ? 1.0 : atoms.back().breakpoint + 1.0;
    while (bhi - blo > 1e-12) {
        const double mid = 0.5 * (blo + bhi);
        (big_h(mid) > beta ? blo : bhi) = mid;
    }
    return finish(0.5 * (blo + bhi));
}

struct GreedyStep {
    int step = 0;           // 1-based; step 1 is the initial model
    double lambda = 0.0;    // lambda* for the update leaving this step
    double divergence = 0.0;
    DiscreteDistribution model;
};

struct GreedyTrace {
    std::vector<GreedyStep> steps;  // size = updates + 1
};

// Greedy optimal-update iteration P^{t+1} = (1-beta) P^t + beta Q*(P^t),
// equivalently dP^{t+1} = max(lambda* dP_d, (1-beta) dP^t). The divergence
// sequence is nonincreasing and contracts at least by (1-beta) per update.
inline GreedyTrace greedy_optimal_iteration(const DiscreteDistribution& p_d,
                                            const DiscreteDistribution& p_1, double beta,
                                            int steps, FDivergenceKind kind) {
    if (!(beta > 0.0) || !(beta < 1.0))
        throw std::invalid_argument("greedy iteration requires beta in (0, 1)");
    detail::check_pair(p_d, p_1);
    if (steps < 0) throw std::invalid_argument("steps must be nonnegative");

    GreedyTrace trace;
    DiscreteDistribution model = p_1;
    for (int t = 1; t <= steps + 1; ++t) {
        const OptimalTargetResult opt = solve_lambda_star(beta, p_d, model);
        trace.steps.push_back({t, opt.lambda, f_divergence(kind, model, p_d), model});
        if (t == steps + 1) break;
        std::vector<double> next(p_d.size());
        for (std::size_t i = 0; i < p_d.size(); ++i)
            next[i] = std::max(opt.lambda * p_d[i], (1.0 - beta) * model[i]);
        model = DiscreteDistribution::normalized(std::move(next));
    }
    return trace;
}

// Step count after which the greedy iteration is guaranteed to match p_d
// exactly: ceil(1 + ln(max(M,1)) / (-ln(1-beta))) with
// M = max_{p_d_i > 0} (1-beta) p_1_i / p_d_i. No finite bound exists when
// the initial model charges an atom outside the data support.
inline std::optional<int> finite_convergence_bound(const DiscreteDistribution& p_d,
                                                   const DiscreteDistribution& p_1, double beta) {
    if (!(beta > 0.0) || beta > 1.0)
        throw std::invalid_argument("finite_convergence_bound: beta in (0, 1]");
    detail::check_pair(p_d, p_1);
    double m = 0.0;
    for (std::size_t i = 0; i < p_d.size(); ++i) {
        if (p_d[i] > 0.0) {
            m = std::max(m, (1.0 - beta) * p_1[i] / p_d[i]);
        } else if (p_1[i] > 0.0) {
            return std::nullopt;
        }
    }
    if (m <= 1.0 || beta == 1.0) return 1;
    return static_cast<int>(std::ceil(1.0 + std::log(m) / (-std::log1p(-beta))));
}

struct EmpiricalLambda {
    double lambda = 0.0;
    std::size_t active_count = 0;  // atoms in I(lambda*), zero-weight atoms excluded
};

// lambda* from sorted discriminator ratios: grow the active prefix until the
// normalization identity lands inside the sandwich
// (1-beta) h_(k) < lambda <= (1-beta) h_(k+1). Atoms with p_i = 0 carry no
// weight and are excluded; ties in h are absorbed as blocks.
inline EmpiricalLambda lambda_star_empirical(double beta, const std::vector<double>& p,
                                             const std::vector<double>& h_values) {
    detail::check_beta(beta);
    if (p.size() != h_values.size())
        throw std::invalid_argument("lambda_star_empirical: mismatched lengths");
    const double gamma = 1.0 - beta;

    struct Atom {
        double h;
        double p;
    };
    std::vector<Atom> atoms;
    atoms.reserve(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (std::isnan(p[i]) || p[i] < 0.0 || std::isnan(h_values[i]) || h_values[i] < 0.0)
            throw std::invalid_argument("lambda_star_empirical: invalid input");
        if (p[i] > 0.0) atoms.push_back({h_values[i], p[i]});
    }
    if (atoms.empty()) throw std::invalid_argument("lambda_star_empirical: all weights zero");
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.h < b.h; });

    double sum_p = 0.0;
    double sum_ph = 0.0;
    std::size_t k = 0;
    double lambda = 0.0;
    while (k < atoms.size()) {
        const double h_block = atoms[k].h;
        while (k < atoms.size() && atoms[k].h == h_block) {
            sum_p += atoms[k].p;
            sum_ph += atoms[k].p * atoms[k].h;
            ++k;
        }
        lambda = (beta / sum_p) * (1.0 + (gamma / beta) * sum_ph);
        if (k == atoms.size() || lambda <= gamma * atoms[k].h) break;
    }
    return {lambda, k};
}

}  // namespace adagan
