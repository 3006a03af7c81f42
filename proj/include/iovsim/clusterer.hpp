#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "iovsim/packet.hpp"
#include "iovsim/rng.hpp"

namespace iovsim {

enum class PacketClass { Critical, NonCritical };

using FeaturePoint = std::array<double, 2>;  // (ttl, priority)

/// Fitted K-means model over min-max-normalized (ttl, priority) features.
struct ClusterModel {
    std::size_t k = 0;
    std::vector<FeaturePoint> centroids;              // normalized coordinates
    std::array<std::array<double, 2>, 2> feature_scale{};  // per feature: {min, max}
    std::size_t critical_index = 0;  // centroid with the lowest priority value

    FeaturePoint normalize(const FeaturePoint& raw) const;
    std::size_t nearest(const FeaturePoint& raw) const;
};

/// D^2-weighted K-means++ seeding. Points are in normalized space here.
/// When all remaining distances are zero the choice falls back to uniform.
std::vector<FeaturePoint> kmeans_pp_init(std::span<const FeaturePoint> points, std::size_t k,
                                         Rng& rng);

struct FitResult {
    ClusterModel model;
    std::vector<int> labels;
    double wcss = 0.0;
    std::size_t iterations = 0;
};

/// Lloyd iterations with K-means++ seeding over min-max-normalized
/// features; empty clusters are reseeded from the farthest point.
/// Throws TooFewPoints when N < k.
FitResult fit(std::span<const FeaturePoint> points, std::size_t k, Rng& rng,
              std::size_t max_iter = 100, double tol = 1e-6);

/// Mean silhouette over all points; singleton clusters score 0.
/// Throws DegenerateClustering when fewer than two clusters are populated.
double silhouette(std::span<const FeaturePoint> points, std::span<const int> labels);

PacketClass classify(const ClusterModel& model, const PacketHeader& header);

void save_cluster_model(const ClusterModel& model, const std::filesystem::path& file);
ClusterModel load_cluster_model(const std::filesystem::path& file);

}  // namespace iovsim
