#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "emvb/index_io.hpp"
#include "emvb/model.hpp"
#include "emvb/pq.hpp"

namespace emvb {

struct BuildOptions {
  std::size_t num_centroids = 0;
  std::size_t m = 16;
  std::size_t iters = 10;
  std::uint64_t seed = 0;
  std::size_t pq_iters = 10;
  /// Uniform sample cap for PQ training.
  std::size_t pq_max_residuals = std::size_t{1} << 20;
  /// Centroid training sample cap, in points per centroid.
  std::size_t max_points_per_centroid = 256;
  std::optional<std::vector<float>> rotation;
  /// Also store r = T - C in full precision (exact residual test mode).
  bool keep_exact_residuals = false;
};

/// Spherical k-means over all tokens. The returned index has centroids but
/// empty inverted lists.
CentroidIndex train_centroids(const TokenEmbeddingCollection& coll, std::size_t num_centroids,
                              std::size_t iters, std::uint64_t seed,
                              std::size_t max_points_per_centroid = 256);

/// Max-dot centroid per token, ties to the lower id.
std::vector<std::uint32_t> assign_tokens(const TokenEmbeddingCollection& coll,
                                         const CentroidIndex& centroids);

InvertedLists build_inverted_lists(std::span<const std::uint32_t> assignments,
                                   std::span<const std::uint64_t> passage_offsets,
                                   std::size_t num_centroids);

/// residuals holds n x dim floats. Rotation, when given, is applied before
/// training and stored in the codebook.
PQCodebook train_pq(std::span<const float> residuals, std::size_t dim, std::size_t m,
                    std::uint64_t seed, std::size_t iters = 10,
                    std::optional<std::vector<float>> rotation = std::nullopt,
                    std::size_t max_residuals = std::size_t{1} << 20);

/// r = T - C for every token, total_tokens x dim.
std::vector<float> compute_residuals(const TokenEmbeddingCollection& coll,
                                     const CentroidIndex& centroids,
                                     std::span<const std::uint32_t> assignments);

std::vector<std::uint8_t> encode_residuals(const TokenEmbeddingCollection& coll,
                                           const CentroidIndex& centroids,
                                           std::span<const std::uint32_t> assignments,
                                           const PQCodebook& pq);

/// Runs the whole pipeline above and returns a checked index.
Index build_index(const TokenEmbeddingCollection& coll, const BuildOptions& opts);

}  // namespace emvb
