#include "emvb/index_builder.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Core>
#include <spdlog/spdlog.h>

#include "emvb/error.hpp"
#include "emvb/kmeans.hpp"

namespace emvb {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

// Applies x -> R x to every row.
std::vector<float> rotate_rows(std::span<const float> rows, std::size_t dim,
                               std::span<const float> rotation) {
  const auto n = static_cast<Eigen::Index>(rows.size() / dim);
  const auto d = static_cast<Eigen::Index>(dim);
  std::vector<float> out(rows.size());
  const ConstRowMap x(rows.data(), n, d);
  const ConstRowMap r(rotation.data(), d, d);
  RowMap(out.data(), n, d).noalias() = x * r.transpose();
  return out;
}

std::vector<float> subspace_rows(std::span<const float> rows, std::size_t dim, std::size_t s,
                                 std::size_t sub_dim) {
  const std::size_t n = rows.size() / dim;
  std::vector<float> out(n * sub_dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(rows.data() + i * dim + s * sub_dim, sub_dim, out.data() + i * sub_dim);
  }
  return out;
}

}  // namespace

CentroidIndex train_centroids(const TokenEmbeddingCollection& coll, std::size_t num_centroids,
                              std::size_t iters, std::uint64_t seed,
                              std::size_t max_points_per_centroid) {
  if (coll.total_tokens() == 0) throw Error("cannot train centroids on an empty collection");
  if (num_centroids == 0) throw Error("num_centroids must be positive");
  if (num_centroids > coll.total_tokens()) {
    throw Error("num_centroids (" + std::to_string(num_centroids) + ") exceeds total tokens (" +
                std::to_string(coll.total_tokens()) + ")");
  }
  KMeansOptions opts;
  opts.k = num_centroids;
  opts.iters = iters;
  opts.seed = seed;
  opts.spherical = true;
  opts.max_points = max_points_per_centroid * num_centroids;
  auto result = kmeans(coll.data(), coll.dim(), opts);

  CentroidIndex index;
  index.dim = coll.dim();
  index.centroids = std::move(result.centroids);
  index.inverted_lists.offsets.assign(num_centroids + 1, 0);
  return index;
}

std::vector<std::uint32_t> assign_tokens(const TokenEmbeddingCollection& coll,
                                         const CentroidIndex& centroids) {
  if (coll.dim() != centroids.dim) throw Error("token and centroid dimensions differ");
  std::vector<std::uint32_t> out(coll.total_tokens());
  assign_nearest(coll.data(), coll.dim(), centroids.centroids, /*spherical=*/true, out);
  return out;
}

InvertedLists build_inverted_lists(std::span<const std::uint32_t> assignments,
                                   std::span<const std::uint64_t> passage_offsets,
                                   std::size_t num_centroids) {
  const std::size_t num_passages = passage_offsets.size() - 1;
  constexpr auto kNone = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> last(num_centroids, kNone);

  InvertedLists lists;
  lists.offsets.assign(num_centroids + 1, 0);
  for (std::size_t p = 0; p < num_passages; ++p) {
    for (std::size_t t = passage_offsets[p]; t < passage_offsets[p + 1]; ++t) {
      const std::uint32_t c = assignments[t];
      if (last[c] != p) {
        last[c] = static_cast<std::uint32_t>(p);
        ++lists.offsets[c + 1];
      }
    }
  }
  for (std::size_t c = 0; c < num_centroids; ++c) lists.offsets[c + 1] += lists.offsets[c];

  lists.ids.resize(lists.offsets.back());
  std::vector<std::uint64_t> cursor(lists.offsets.begin(), lists.offsets.end() - 1);
  std::fill(last.begin(), last.end(), kNone);
  for (std::size_t p = 0; p < num_passages; ++p) {
    for (std::size_t t = passage_offsets[p]; t < passage_offsets[p + 1]; ++t) {
      const std::uint32_t c = assignments[t];
      if (last[c] != p) {
        last[c] = static_cast<std::uint32_t>(p);
        lists.ids[cursor[c]++] = static_cast<std::uint32_t>(p);
      }
    }
  }
  return lists;
}

PQCodebook train_pq(std::span<const float> residuals, std::size_t dim, std::size_t m,
                    std::uint64_t seed, std::size_t iters,
                    std::optional<std::vector<float>> rotation, std::size_t max_residuals) {
  PQCodebook pq(dim, m);  // validates dim % m
  if (residuals.empty() || residuals.size() % dim != 0) {
    throw Error("PQ training needs a non-empty n x dim residual matrix");
  }
  if (rotation) pq.set_rotation(std::move(*rotation));

  std::vector<float> rotated;
  std::span<const float> train = residuals;
  if (pq.has_rotation()) {
    rotated = rotate_rows(residuals, dim, pq.rotation());
    train = rotated;
  }

  const std::size_t ds = pq.sub_dim();
  std::vector<float> codewords(dim * kCodewordsPerSubspace);
  for (std::size_t s = 0; s < m; ++s) {
    const auto sub = subspace_rows(train, dim, s, ds);
    KMeansOptions opts;
    opts.k = kCodewordsPerSubspace;
    opts.iters = iters;
    opts.seed = seed + s;
    opts.max_points = max_residuals;
    const auto result = kmeans(sub, ds, opts);
    std::copy(result.centroids.begin(), result.centroids.end(),
              codewords.begin() + static_cast<std::ptrdiff_t>(s * kCodewordsPerSubspace * ds));
  }
  PQCodebook trained(dim, m, std::move(codewords));
  if (pq.has_rotation()) {
    trained.set_rotation(std::vector<float>(pq.rotation().begin(), pq.rotation().end()));
  }
  return trained;
}

std::vector<float> compute_residuals(const TokenEmbeddingCollection& coll,
                                     const CentroidIndex& centroids,
                                     std::span<const std::uint32_t> assignments) {
  const std::size_t dim = coll.dim();
  std::vector<float> out(coll.total_tokens() * dim);
  for (std::size_t t = 0; t < coll.total_tokens(); ++t) {
    const auto x = coll.token(t);
    const auto c = centroids.centroid(assignments[t]);
    float* r = out.data() + t * dim;
    for (std::size_t d = 0; d < dim; ++d) r[d] = x[d] - c[d];
  }
  return out;
}

std::vector<std::uint8_t> encode_residuals(const TokenEmbeddingCollection& coll,
                                           const CentroidIndex& centroids,
                                           std::span<const std::uint32_t> assignments,
                                           const PQCodebook& pq) {
  const std::size_t dim = coll.dim();
  if (pq.dim() != dim) throw Error("PQ codebook dimension differs from the collection");
  auto residuals = compute_residuals(coll, centroids, assignments);
  if (pq.has_rotation()) residuals = rotate_rows(residuals, dim, pq.rotation());

  const std::size_t n = coll.total_tokens();
  const std::size_t m = pq.m();
  const std::size_t ds = pq.sub_dim();
  std::vector<std::uint8_t> codes(n * m);
  std::vector<std::uint32_t> nearest(n);
  for (std::size_t s = 0; s < m; ++s) {
    const auto sub = subspace_rows(residuals, dim, s, ds);
    const auto book = pq.codewords().subspan(s * kCodewordsPerSubspace * ds,
                                             kCodewordsPerSubspace * ds);
    assign_nearest(sub, ds, book, /*spherical=*/false, nearest);
    for (std::size_t t = 0; t < n; ++t) codes[t * m + s] = static_cast<std::uint8_t>(nearest[t]);
  }
  return codes;
}

Index build_index(const TokenEmbeddingCollection& coll, const BuildOptions& opts) {
  if (coll.empty()) throw Error("cannot build an index over an empty collection");
  if (const auto violations = validate_collection(coll); !violations.empty()) {
    throw Error("invalid collection: " + describe(violations.front()));
  }
  if (coll.dim() % opts.m != 0) {
    throw Error("dimension " + std::to_string(coll.dim()) + " is not divisible by m=" +
                std::to_string(opts.m));
  }

  spdlog::info("training {} centroids on {} tokens", opts.num_centroids, coll.total_tokens());
  Index index;
  index.centroids = train_centroids(coll, opts.num_centroids, opts.iters, opts.seed,
                                    opts.max_points_per_centroid);
  const auto assignments = assign_tokens(coll, index.centroids);
  index.centroids.inverted_lists =
      build_inverted_lists(assignments, coll.offsets(), opts.num_centroids);

  spdlog::info("training PQ with m={}", opts.m);
  auto residuals = compute_residuals(coll, index.centroids, assignments);
  auto pq = train_pq(residuals, coll.dim(), opts.m, opts.seed, opts.pq_iters, opts.rotation,
                     opts.pq_max_residuals);

  index.corpus.pq_codes = encode_residuals(coll, index.centroids, assignments, pq);
  index.corpus.pq = std::move(pq);
  index.corpus.token_cids = assignments;
  index.corpus.passage_offsets.assign(coll.offsets().begin(), coll.offsets().end());
  if (opts.keep_exact_residuals) index.exact_residuals = std::move(residuals);

  check_index(index);
  return index;
}

}  // namespace emvb
