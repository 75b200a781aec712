#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "adagan/mixture.hpp"

namespace adagan {

// Planar mixture of isolated isotropic Gaussians: mode centers are drawn
// uniformly in a square from a dedicated seed (so the target distribution is
// the same across all experiments touching it) and rejected until every pair
// sits at least 6 sigma apart.
struct ToyDatasetSpec {
    int mode_count = 5;
    double square_half_width = 10.0;
    double sigma_base = 5.0;  // sigma = sigma_base / (2 sqrt(mode_count))
    std::uint64_t dataset_seed = 0;
    Eigen::Index train_size = 64000;
    Eigen::Index test_size = 8000;

    double sigma() const { return sigma_base / (2.0 * std::sqrt(static_cast<double>(mode_count))); }
};

struct ToyDataset {
    Points train;
    Points test;
    GeneratorPtr density;  // the true target distribution
    std::vector<Eigen::Vector2d> centers;
};

inline std::vector<Eigen::Vector2d> toy_mode_centers(const ToyDatasetSpec& spec) {
    if (spec.mode_count < 1) throw std::invalid_argument("toy dataset: mode_count must be >= 1");
    Rng center_rng(derive_seed(spec.dataset_seed, {0x70f0ULL}));
    const double w = spec.square_half_width;
    const double min_dist = 6.0 * spec.sigma();
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<Eigen::Vector2d> centers;
        for (int m = 0; m < spec.mode_count; ++m)
            centers.emplace_back(center_rng.uniform(-w, w), center_rng.uniform(-w, w));
        bool ok = true;
        for (std::size_t i = 0; i < centers.size() && ok; ++i)
            for (std::size_t j = i + 1; j < centers.size() && ok; ++j)
                ok = (centers[i] - centers[j]).norm() >= min_dist;
        if (ok) return centers;
    }
    throw std::runtime_error(
        "toy dataset: could not separate the modes; use a larger square or fewer modes");
}

inline ToyDataset generate_toy_dataset(const ToyDatasetSpec& spec, Rng& rng) {
    const auto centers = toy_mode_centers(spec);
    const double var = spec.sigma() * spec.sigma();
    std::vector<GeneratorPtr> comps;
    for (const auto& c : centers)
        comps.push_back(
            std::make_shared<GaussianGenerator>(c, var * Eigen::Matrix2d::Identity()));
    auto density = std::make_shared<GeneratorMixture>(
        std::move(comps),
        std::vector<double>(centers.size(), 1.0 / static_cast<double>(centers.size())));

    ToyDataset out{density->sample(spec.train_size, rng), density->sample(spec.test_size, rng),
                   density, centers};
    return out;
}

}  // namespace adagan
