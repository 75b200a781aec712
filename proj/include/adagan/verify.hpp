#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "adagan/distribution.hpp"
#include "adagan/divergence.hpp"
#include "adagan/optimal_target.hpp"
#include "adagan/rng.hpp"

namespace adagan {

struct PropertyResult {
    std::string id;
    double tolerance = 0.0;
    int instances = 0;
    long checks = 0;
    long failures = 0;
    double worst_violation = -std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
    nlohmann::ordered_json failing_instance;  // first offending instance, null when clean

    bool pass() const { return failures == 0; }
};

struct VerificationReport {
    std::uint64_t seed = 0;
    int instances_per_property = 0;
    std::size_t max_support = 0;
    std::vector<PropertyResult> properties;

    bool all_pass() const {
        for (const auto& p : properties)
            if (!p.pass()) return false;
        return true;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["seed"] = seed;
        j["instances_per_property"] = instances_per_property;
        j["max_support"] = max_support;
        j["all_pass"] = all_pass();
        j["properties"] = nlohmann::ordered_json::array();
        for (const auto& p : properties) {
            nlohmann::ordered_json e;
            e["id"] = p.id;
            e["tolerance"] = p.tolerance;
            e["instances"] = p.instances;
            e["checks"] = p.checks;
            e["failures"] = p.failures;
            e["worst_violation"] =
                std::isfinite(p.worst_violation) ? p.worst_violation : -1.0;
            e["excess_over_tolerance"] =
                std::isfinite(p.worst_violation) ? p.worst_violation - p.tolerance : -1.0;
            e["seed"] = p.seed;
            e["failing_instance"] = p.failing_instance;
            j["properties"].push_back(std::move(e));
        }
        return j;
    }
};

namespace detail {

struct RandomInstance {
    DiscreteDistribution p_d;
    DiscreteDistribution p_g;
    double beta = 0.5;

    nlohmann::ordered_json to_json(const std::string& note) const {
        nlohmann::ordered_json j;
        j["p_d"] = p_d.masses();
        j["p_g"] = p_g.masses();
        j["beta"] = beta;
        j["note"] = note;
        return j;
    }
};

class PropertyRecorder {
  public:
    PropertyRecorder(std::string id, double tolerance, std::uint64_t seed) {
        result_.id = std::move(id);
        result_.tolerance = tolerance;
        result_.seed = seed;
    }

    void begin_instance() { ++result_.instances; }

    void check(double violation, const std::function<nlohmann::ordered_json()>& context) {
        ++result_.checks;
        result_.worst_violation = std::max(result_.worst_violation, violation);
        if (violation > result_.tolerance) {
            ++result_.failures;
            if (result_.failing_instance.is_null()) result_.failing_instance = context();
        }
    }

    PropertyResult result() && { return std::move(result_); }

  private:
    PropertyResult result_;
};

inline std::size_t draw_support(Rng& rng, std::size_t max_support, std::size_t cap) {
    const std::size_t hi = std::min(max_support, cap);
    return 2 + rng.uniform_index(hi - 1);
}

inline RandomInstance draw_instance(Rng& rng, std::size_t max_support, std::size_t cap = 64) {
    const std::size_t n = draw_support(rng, max_support, cap);
    auto p_d = sample_distribution(rng, n, 0.25);
    auto p_g = sample_distribution(rng, n, 0.25);
    double beta = rng.uniform(0.05, 1.0);
    if (rng.uniform01() < 0.05) beta = 1.0;
    return {std::move(p_d), std::move(p_g), beta};
}

// Instance satisfying the surrogate feasibility condition P_d(dP_g=0) < beta.
inline RandomInstance draw_feasible_instance(Rng& rng, std::size_t max_support,
                                             std::size_t cap = 64) {
    for (;;) {
        const std::size_t n = draw_support(rng, max_support, cap);
        auto p_d = sample_distribution(rng, n, 0.25);
        auto p_g = sample_distribution(rng, n, 0.25);
        double missing = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (p_g[i] == 0.0) missing += p_d[i];
        if (missing >= 0.9) continue;
        const double beta = missing + rng.uniform(0.05, 0.95) * (1.0 - missing);
        return {std::move(p_d), std::move(p_g), beta};
    }
}

inline DiscreteDistribution mix_distributions(double beta, const DiscreteDistribution& p_g,
                                              const DiscreteDistribution& q) {
    std::vector<double> m(p_g.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = (1.0 - beta) * p_g[i] + beta * q[i];
    return DiscreteDistribution::normalized(std::move(m));
}

// Feasible candidate for the surrogate problem: clip a simplex draw at the
// caps p_d_i / beta and hand the clipped excess to atoms with headroom.
inline DiscreteDistribution sample_capped_candidate(Rng& rng, const DiscreteDistribution& p_d,
                                                    double beta) {
    const std::size_t n = p_d.size();
    std::vector<double> q(n);
    double sum = 0.0;
    for (double& v : q) sum += (v = rng.exponential());
    double deficit = 0.0;
    double headroom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        q[i] /= sum;
        const double cap = p_d[i] / beta;
        if (q[i] > cap) {
            deficit += q[i] - cap;
            q[i] = cap;
        }
        headroom += p_d[i] / beta - q[i];
    }
    if (deficit > 0.0 && headroom > 0.0) {
        for (std::size_t i = 0; i < n; ++i) q[i] += deficit * (p_d[i] / beta - q[i]) / headroom;
    }
    return DiscreteDistribution::normalized(std::move(q));
}

// Surrogate objective D_f(p_g || (p_d - beta q)/(1-beta)) for beta q <= p_d.
// Saturated atoms (beta q_i = p_d_i) must come out exactly zero; the
// subtraction leaves a few ulps of dust there, which would turn the infinite
// boundary constants into spurious infinities, so dust is clipped.
inline double surrogate_objective(FDivergenceKind kind, const DiscreteDistribution& p_g,
                                  const DiscreteDistribution& p_d, const DiscreteDistribution& q,
                                  double beta) {
    std::vector<double> t(p_d.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        double v = std::max(0.0, p_d[i] - beta * q[i]);
        if (v <= 1e-12 * p_d[i]) v = 0.0;
        t[i] = v / (1.0 - beta);
    }
    return f_divergence(kind, p_g, DiscreteDistribution::normalized(std::move(t)));
}

// lhs <= rhs + tol with saturating infinities: an infinite bound is vacuous.
inline double bound_violation(double lhs, double rhs) {
    if (std::isinf(rhs)) return -1.0;
    if (std::isinf(lhs)) return std::numeric_limits<double>::infinity();
    return lhs - rhs;
}

}  // namespace detail

// Runs every randomized property suite of the discrete theory and reports
// per-property failure counts and worst violations. Deterministic given the
// seed: every property owns a stream derived from (seed, property index), so
// results do not depend on evaluation order.
inline VerificationReport run_verification(std::uint64_t seed, int instances_per_property,
                                           std::size_t max_support) {
    using detail::bound_violation;
    using detail::mix_distributions;
    using detail::PropertyRecorder;
    using detail::RandomInstance;

    if (instances_per_property < 1)
        throw std::invalid_argument("run_verification: instances_per_property must be >= 1");
    if (max_support < 2) throw std::invalid_argument("run_verification: max_support must be >= 2");

    VerificationReport report;
    report.seed = seed;
    report.instances_per_property = instances_per_property;
    report.max_support = max_support;

    const int candidates = 2000;
    std::uint64_t property_index = 0;
    auto stream = [&](std::uint64_t idx) { return derive_seed(seed, {0xadaf00dULL, idx}); };

    auto run_property = [&](const std::string& id, double tol,
                            const std::function<void(PropertyRecorder&, Rng&)>& body) {
        const std::uint64_t pseed = stream(property_index++);
        PropertyRecorder rec(id, tol, pseed);
        Rng rng(pseed);
        body(rec, rng);
        report.properties.push_back(std::move(rec).result());
    };

    // --- divergence-level properties ---------------------------------------

    run_property("divergence_nonnegative", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_instance(rng, max_support);
            for (auto kind : kAllDivergenceKinds) {
                const double d = f_divergence(kind, inst.p_g, inst.p_d);
                rec.check(std::isinf(d) ? -1.0 : -d,
                          [&] { return inst.to_json(FDivergence(kind).name()); });
            }
        }
    });

    run_property("normalized_f_identity", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_instance(rng, max_support);
            for (auto kind : kAllDivergenceKinds) {
                const double a = f_divergence(kind, inst.p_g, inst.p_d);
                const double b = f0_divergence(kind, inst.p_g, inst.p_d);
                const double v = (std::isinf(a) || std::isinf(b))
                                     ? (std::isinf(a) == std::isinf(b) ? -1.0 : 1.0)
                                     : std::abs(a - b);
                rec.check(v, [&] { return inst.to_json(FDivergence(kind).name()); });
            }
        }
    });

    run_property("conjugate_reversal_identity", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_instance(rng, max_support);
            for (auto kind : kAllDivergenceKinds) {
                const double a = f_divergence(kind, inst.p_g, inst.p_d);     // D_f(P_g||P_d)
                const double b = fconj_divergence(kind, inst.p_d, inst.p_g); // D_f°(P_d||P_g)
                const double v = (std::isinf(a) || std::isinf(b))
                                     ? (std::isinf(a) == std::isinf(b) ? -1.0 : 1.0)
                                     : std::abs(a - b);
                rec.check(v, [&] { return inst.to_json(FDivergence(kind).name()); });
            }
        }
    });

    run_property("joint_convexity", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            const std::size_t n = detail::draw_support(rng, max_support, 64);
            const auto q1 = sample_distribution(rng, n, 0.2);
            const auto q2 = sample_distribution(rng, n, 0.2);
            const auto p1 = sample_distribution(rng, n, 0.2);
            const auto p2 = sample_distribution(rng, n, 0.2);
            const double t = rng.uniform01();
            const auto qm = mix_distributions(t, q2, q1);
            const auto pm = mix_distributions(t, p2, p1);
            for (auto kind : kAllDivergenceKinds) {
                const double lhs = f_divergence(kind, qm, pm);
                const double rhs =
                    t * f_divergence(kind, q1, p1) + (1.0 - t) * f_divergence(kind, q2, p2);
                rec.check(bound_violation(lhs, rhs), [&] {
                    nlohmann::ordered_json j;
                    j["q1"] = q1.masses();
                    j["q2"] = q2.masses();
                    j["p1"] = p1.masses();
                    j["p2"] = p2.masses();
                    j["t"] = t;
                    j["note"] = FDivergence(kind).name();
                    return j;
                });
            }
        }
    });

    run_property("hilbertian_triangle", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            const std::size_t n = detail::draw_support(rng, max_support, 64);
            const auto p = sample_distribution(rng, n, 0.25);
            const auto q = sample_distribution(rng, n, 0.25);
            const auto r = sample_distribution(rng, n, 0.25);
            for (auto kind : kHilbertianKinds) {
                const double lhs = std::sqrt(f_divergence(kind, p, q));
                const double rhs =
                    std::sqrt(f_divergence(kind, p, r)) + std::sqrt(f_divergence(kind, r, q));
                rec.check(lhs - rhs, [&] {
                    nlohmann::ordered_json j;
                    j["p"] = p.masses();
                    j["q"] = q.masses();
                    j["r"] = r.masses();
                    j["note"] = FDivergence(kind).name();
                    return j;
                });
            }
        }
    });

    run_property("js_decomposition", 1e-10, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_instance(rng, max_support);
            const auto [direct, kl_sum] = js_decomposition_check(inst.p_d, inst.p_g);
            rec.check(std::abs(direct - kl_sum), [&] { return inst.to_json("js decomposition"); });
        }
    });

    run_property("density_ratio_monotone", 1e-12, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            double d1 = rng.uniform(1e-5, 1.0 - 1e-5);
            double d2 = rng.uniform(1e-5, 1.0 - 1e-5);
            if (d1 > d2) std::swap(d1, d2);
            if (d2 - d1 < 1e-9) continue;
            const double h1 = density_ratio_from_discriminator(d1);
            const double h2 = density_ratio_from_discriminator(d2);
            rec.check(h2 - h1, [&] {
                nlohmann::ordered_json j;
                j["d1"] = d1;
                j["d2"] = d2;
                j["note"] = "h must strictly decrease";
                return j;
            });
            rec.check(std::abs(density_ratio_from_discriminator(0.5) - 1.0),
                      [&] { return nlohmann::ordered_json{{"note", "h(0.5) = 1"}}; });
        }
    });

    // --- optimal-target properties ------------------------------------------

    run_property("optimal_target_brute_force", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_instance(rng, max_support, 8);
            const auto opt = solve_lambda_star(inst.beta, inst.p_d, inst.p_g);
            const auto mix_opt = mix_distributions(inst.beta, inst.p_g, opt.target);
            double best[5];
            for (std::size_t k = 0; k < kAllDivergenceKinds.size(); ++k)
                best[k] = f_divergence(kAllDivergenceKinds[k], mix_opt, inst.p_d);
            for (int c = 0; c < candidates; ++c) {
                const auto q = sample_distribution(rng, inst.p_d.size(), 0.15);
                const auto m = mix_distributions(inst.beta, inst.p_g, q);
                for (std::size_t k = 0; k < kAllDivergenceKinds.size(); ++k) {
                    const double dc = f_divergence(kAllDivergenceKinds[k], m, inst.p_d);
                    rec.check(bound_violation(best[k], dc), [&] {
                        auto j = inst.to_json(FDivergence(kAllDivergenceKinds[k]).name());
                        j["candidate"] = q.masses();
                        return j;
                    });
                }
            }
        }
    });

    run_property("optimal_target_f_independence", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        // The solver never looks at f; certify that the one target it returns
        // is locally unimprovable under mass transfers for every kind.
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_instance(rng, max_support, 8);
            const auto opt = solve_lambda_star(inst.beta, inst.p_d, inst.p_g);
            const auto mix_opt = mix_distributions(inst.beta, inst.p_g, opt.target);
            const std::size_t n = inst.p_d.size();
            for (int c = 0; c < 200; ++c) {
                const std::size_t from = rng.uniform_index(n);
                const std::size_t to = rng.uniform_index(n);
                if (from == to || opt.target[from] <= 0.0) continue;
                const double amount = opt.target[from] * rng.uniform(0.01, 1.0);
                std::vector<double> q = opt.target.masses();
                q[from] -= amount;
                q[to] += amount;
                const auto m = mix_distributions(inst.beta, inst.p_g,
                                                 DiscreteDistribution::normalized(std::move(q)));
                for (auto kind : kAllDivergenceKinds) {
                    const double v = bound_violation(f_divergence(kind, mix_opt, inst.p_d),
                                                     f_divergence(kind, m, inst.p_d));
                    rec.check(v, [&] { return inst.to_json(FDivergence(kind).name()); });
                }
            }
        }
    });

    run_property("surrogate_target_brute_force", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_feasible_instance(rng, max_support, 8);
            if (inst.beta >= 1.0) continue;
            const auto opt = solve_lambda_dagger(inst.beta, inst.p_d, inst.p_g);
            double best[5];
            for (std::size_t k = 0; k < kAllDivergenceKinds.size(); ++k)
                best[k] = detail::surrogate_objective(kAllDivergenceKinds[k], inst.p_g, inst.p_d,
                                                      opt.target, inst.beta);
            for (int c = 0; c < candidates / 4; ++c) {
                const auto q = detail::sample_capped_candidate(rng, inst.p_d, inst.beta);
                for (std::size_t k = 0; k < kAllDivergenceKinds.size(); ++k) {
                    const double dc = detail::surrogate_objective(kAllDivergenceKinds[k], inst.p_g,
                                                                  inst.p_d, q, inst.beta);
                    rec.check(bound_violation(best[k], dc), [&] {
                        auto j = inst.to_json(FDivergence(kAllDivergenceKinds[k]).name());
                        j["candidate"] = q.masses();
                        return j;
                    });
                }
            }
        }
    });

    run_property("improvement_bound", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_feasible_instance(rng, max_support);
            const auto star = solve_lambda_star(inst.beta, inst.p_d, inst.p_g);
            const auto dagger = solve_lambda_dagger(inst.beta, inst.p_d, inst.p_g);
            for (auto kind : kAllDivergenceKinds) {
                const double base = f_divergence(kind, inst.p_g, inst.p_d);
                const double rhs = (1.0 - inst.beta) * base;
                for (const auto* tgt : {&star.target, &dagger.target}) {
                    const double lhs = f_divergence(
                        kind, mix_distributions(inst.beta, inst.p_g, *tgt), inst.p_d);
                    rec.check(bound_violation(lhs, rhs),
                              [&] { return inst.to_json(FDivergence(kind).name()); });
                }
            }
        }
    });

    run_property("refined_m_bound", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_instance(rng, max_support);
            const double gamma = 1.0 - inst.beta;
            double m = 0.0;
            bool unbounded = false;
            for (std::size_t i = 0; i < inst.p_d.size(); ++i) {
                if (inst.p_d[i] > 0.0)
                    m = std::max(m, gamma * inst.p_g[i] / inst.p_d[i]);
                else if (inst.p_g[i] > 0.0)
                    unbounded = true;
            }
            if (unbounded) continue;
            m = std::max(m, 1.0 + 1e-9);
            const auto opt = solve_lambda_star(inst.beta, inst.p_d, inst.p_g);
            const auto mixed = mix_distributions(inst.beta, inst.p_g, opt.target);
            for (auto kind : kAllDivergenceKinds) {
                const FDivergence d(kind);
                const double lhs = f0_divergence(kind, mixed, inst.p_d);
                const double rhs =
                    d.f0(opt.lambda) + d.f0(m) * (1.0 - opt.lambda) / (m - 1.0);
                rec.check(bound_violation(lhs, rhs), [&] {
                    auto j = inst.to_json(d.name());
                    j["M"] = m;
                    j["lambda"] = opt.lambda;
                    return j;
                });
            }
        }
    });

    run_property("lambda_one_equivalence", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            const std::size_t n = detail::draw_support(rng, max_support, 32);
            const auto p_d = sample_distribution(rng, n, 0.2);
            const double beta = rng.uniform(0.05, 0.95);
            const double gamma = 1.0 - beta;
            const bool covered_case = it % 2 == 0;

            std::vector<double> raw(n);
            if (covered_case) {
                // p_g = (1-s) p_d + s r with s scaled so that gamma p_g <= p_d atomwise
                std::vector<double> r(n, 0.0);
                double sum = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (p_d[i] > 0.0) sum += (r[i] = rng.exponential());
                double s = 1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    r[i] /= sum;
                    if (r[i] > p_d[i])
                        s = std::min(s, beta * p_d[i] / (gamma * (r[i] - p_d[i])));
                }
                s *= 0.9;
                for (std::size_t i = 0; i < n; ++i) raw[i] = (1.0 - s) * p_d[i] + s * r[i];
            } else {
                // charge an atom outside the data support
                for (std::size_t i = 0; i < n; ++i) raw[i] = rng.exponential();
            }
            auto p_g = DiscreteDistribution::normalized(std::move(raw));
            DiscreteDistribution p_d_used = p_d;
            if (!covered_case) {
                std::vector<double> pd = p_d.masses();
                const std::size_t j = static_cast<std::size_t>(
                    std::min_element(pd.begin(), pd.end()) - pd.begin());
                pd[j] = 0.0;
                std::vector<double> pg = p_g.masses();
                pg[j] = std::max(pg[j], 0.5);
                p_d_used = DiscreteDistribution::normalized(std::move(pd));
                p_g = DiscreteDistribution::normalized(std::move(pg));
            }

            const RandomInstance inst{p_d_used, p_g, beta};
            const auto opt = solve_lambda_star(beta, p_d_used, p_g);
            const auto mixed = mix_distributions(beta, p_g, opt.target);
            if (covered_case) {
                rec.check(std::abs(opt.lambda - 1.0),
                          [&] { return inst.to_json("covered: lambda* must be 1"); });
                for (auto kind : kAllDivergenceKinds)
                    rec.check(f_divergence(kind, mixed, p_d_used),
                              [&] { return inst.to_json("covered: divergence must vanish"); });
            } else {
                rec.check(opt.lambda - (1.0 - 1e-6),
                          [&] { return inst.to_json("over-covered: lambda* must sit below 1"); });
                const double tv = f_divergence(FDivergenceKind::TotalVariation, mixed, p_d_used);
                rec.check(tv > 1e-12 ? -1.0 : 1.0,
                          [&] { return inst.to_json("over-covered: divergence must stay positive"); });
            }
        }
    });

    run_property("empirical_solver_crosscheck", 1e-10, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_instance(rng, max_support);
            std::vector<double> p, h;
            for (std::size_t i = 0; i < inst.p_d.size(); ++i) {
                if (inst.p_d[i] > 0.0) {
                    p.push_back(inst.p_d[i]);
                    h.push_back(inst.p_g[i] / inst.p_d[i]);
                }
            }
            const auto emp = lambda_star_empirical(inst.beta, p, h);
            const auto full = solve_lambda_star(inst.beta, inst.p_d, inst.p_g);
            rec.check(std::abs(emp.lambda - full.lambda),
                      [&] { return inst.to_json("empirical vs distribution solver"); });
        }
    });

    run_property("g_lambda_right_derivative", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_instance(rng, max_support);
            if (inst.beta >= 1.0) continue;
            const double gamma = 1.0 - inst.beta;
            std::vector<double> bps;
            for (std::size_t i = 0; i < inst.p_d.size(); ++i)
                if (inst.p_d[i] > 0.0) bps.push_back(gamma * inst.p_g[i] / inst.p_d[i]);
            std::sort(bps.begin(), bps.end());
            const double lambda = rng.uniform(0.0, bps.back() + 1.0);
            double gap = std::numeric_limits<double>::infinity();
            for (double b : bps) gap = std::min(gap, std::abs(lambda - b));
            if (gap < 1e-6) continue;
            const double eps = std::min(gap / 4.0, 1e-6);
            const double fd = (g_lambda(lambda + eps, inst.beta, inst.p_d, inst.p_g) -
                               g_lambda(lambda, inst.beta, inst.p_d, inst.p_g)) /
                              eps;
            double active = 0.0;
            for (std::size_t i = 0; i < inst.p_d.size(); ++i)
                if (lambda * inst.p_d[i] >= gamma * inst.p_g[i]) active += inst.p_d[i];
            rec.check(std::abs(fd - active) - 1e-9 * std::max(1.0, lambda / eps),
                      [&] { return inst.to_json("right derivative"); });
        }
    });

    run_property("lambda_relations", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_feasible_instance(rng, max_support);
            const auto star = solve_lambda_star(inst.beta, inst.p_d, inst.p_g);
            const auto dagger = solve_lambda_dagger(inst.beta, inst.p_d, inst.p_g);
            rec.check(1.0 - dagger.lambda, [&] { return inst.to_json("lambda† >= 1"); });
            rec.check(star.lambda - dagger.lambda,
                      [&] { return inst.to_json("lambda† >= lambda*"); });
            rec.check(1.0 - star.lambda * dagger.lambda,
                      [&] { return inst.to_json("lambda* lambda† >= 1"); });
        }
    });

    run_property("decomposition_bound_surrogate", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_feasible_instance(rng, max_support);
            if (inst.beta >= 1.0) continue;
            const auto dagger = solve_lambda_dagger(inst.beta, inst.p_d, inst.p_g);
            for (int c = 0; c < 20; ++c) {
                const auto q = sample_distribution(rng, inst.p_d.size(), 0.15);
                for (auto kind : kAllDivergenceKinds) {
                    const double lhs = f_divergence(
                        kind, mix_distributions(inst.beta, inst.p_g, q), inst.p_d);
                    const double rhs =
                        inst.beta * f_divergence(kind, q, dagger.target) +
                        (1.0 - inst.beta) * detail::surrogate_objective(kind, inst.p_g, inst.p_d,
                                                                        dagger.target, inst.beta);
                    rec.check(bound_violation(lhs, rhs),
                              [&] { return inst.to_json(FDivergence(kind).name()); });
                }
            }
        }
    });

    run_property("decomposition_bound_hilbertian", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_instance(rng, max_support);
            const auto star = solve_lambda_star(inst.beta, inst.p_d, inst.p_g);
            for (int c = 0; c < 20; ++c) {
                const auto q = sample_distribution(rng, inst.p_d.size(), 0.15);
                for (auto kind : kHilbertianKinds) {
                    const double lhs = f_divergence(
                        kind, mix_distributions(inst.beta, inst.p_g, q), inst.p_d);
                    const double opt_val = f_divergence(
                        kind, mix_distributions(inst.beta, inst.p_g, star.target), inst.p_d);
                    const double root = std::sqrt(inst.beta * f_divergence(kind, q, star.target)) +
                                        std::sqrt(opt_val);
                    rec.check(bound_violation(lhs, root * root),
                              [&] { return inst.to_json(FDivergence(kind).name()); });
                }
            }
        }
    });

    run_property("weak_to_strong_surrogate", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_feasible_instance(rng, max_support);
            if (inst.beta >= 1.0) continue;
            const auto dagger = solve_lambda_dagger(inst.beta, inst.p_d, inst.p_g);
            for (int c = 0; c < 8; ++c) {
                // blend toward the optimum so the weak-learnability premise fires
                const double w = rng.uniform01();
                const auto noise = sample_distribution(rng, inst.p_d.size(), 0.15);
                const auto q = mix_distributions(w, dagger.target, noise);
                for (auto kind : kAllDivergenceKinds) {
                    const double base = f_divergence(kind, inst.p_g, inst.p_d);
                    if (!(base > 0.0) || std::isinf(base)) continue;
                    const double gamma_eff = f_divergence(kind, q, dagger.target) / base;
                    if (!(gamma_eff <= 1.0)) continue;
                    const double lhs = f_divergence(
                        kind, mix_distributions(inst.beta, inst.p_g, q), inst.p_d);
                    const double rhs = (1.0 - inst.beta * (1.0 - gamma_eff)) * base;
                    rec.check(bound_violation(lhs, rhs),
                              [&] { return inst.to_json(FDivergence(kind).name()); });
                }
            }
        }
    });

    run_property("weak_to_strong_hilbertian", 1e-9, [&](PropertyRecorder& rec, Rng& rng) {
        for (int it = 0; it < instances_per_property; ++it) {
            rec.begin_instance();
            auto inst = detail::draw_instance(rng, max_support);
            const auto star = solve_lambda_star(inst.beta, inst.p_d, inst.p_g);
            for (int c = 0; c < 8; ++c) {
                const double w = rng.uniform01();
                const auto noise = sample_distribution(rng, inst.p_d.size(), 0.15);
                const auto q = mix_distributions(w, star.target, noise);
                for (auto kind : kHilbertianKinds) {
                    const double base = f_divergence(kind, inst.p_g, inst.p_d);
                    if (!(base > 0.0) || std::isinf(base)) continue;
                    const double gamma_eff = f_divergence(kind, q, star.target) / base;
                    if (!(gamma_eff <= 1.0)) continue;
                    const double coef = std::sqrt(gamma_eff * inst.beta) +
                                        std::sqrt(1.0 - inst.beta);
                    const double lhs = f_divergence(
                        kind, mix_distributions(inst.beta, inst.p_g, q), inst.p_d);
                    rec.check(bound_violation(lhs, coef * coef * base),
                              [&] { return inst.to_json(FDivergence(kind).name()); });
                }
            }
        }
    });

    return report;
}

}  // namespace adagan
