#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace emvb {

struct KMeansOptions {
  std::size_t k = 0;
  std::size_t iters = 10;
  std::uint64_t seed = 0;
  /// Max-dot assignment and unit-length centroids (inputs must be unit).
  bool spherical = false;
  /// Train on a uniform sample of at most this many points; 0 keeps all.
  std::size_t max_points = 0;
};

struct KMeansResult {
  std::vector<float> centroids;  // k x dim
  /// Mean squared distance of the training points to their assigned
  /// centroid, one entry per Lloyd iteration, measured at assignment time.
  std::vector<double> error_history;
};

/// k-means++ seeding followed by Lloyd iterations. Empty clusters are
/// re-seeded with the point farthest from its centroid. With fewer than k
/// points the training set is padded by sampling with replacement.
/// Deterministic for a given seed.
KMeansResult kmeans(std::span<const float> points, std::size_t dim, const KMeansOptions& opts);

/// Index of the nearest centroid per point (max dot when spherical, min L2
/// otherwise), ties to the lower id. Optionally returns the squared distance.
void assign_nearest(std::span<const float> points, std::size_t dim, std::span<const float> centroids,
                    bool spherical, std::span<std::uint32_t> assignment,
                    std::span<float> sq_distance = {});

}  // namespace emvb
