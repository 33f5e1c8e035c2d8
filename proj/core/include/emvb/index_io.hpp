#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "emvb/model.hpp"

namespace emvb {

inline constexpr std::uint32_t kIndexFormatVersion = 1;

/// Everything a query needs. exact_residuals is only populated in exact
/// residual test mode (total_tokens x dim floats, r = T - C).
struct Index {
  CentroidIndex centroids;
  CompressedCorpus corpus;
  std::vector<float> exact_residuals;

  std::size_t dim() const noexcept { return centroids.dim; }
  bool has_exact_residuals() const noexcept { return !exact_residuals.empty(); }
  std::span<const float> exact_residual(std::size_t token) const {
    return {exact_residuals.data() + token * dim(), dim()};
  }

  bool operator==(const Index&) const = default;
};

struct IndexMeta {
  std::uint32_t version = kIndexFormatVersion;
  std::size_t dim = 0;
  std::size_t m = 0;
  std::size_t num_centroids = 0;
  std::size_t num_passages = 0;
  std::size_t total_tokens = 0;
  bool has_rotation = false;
  bool has_exact_residuals = false;
};

/// Checks the structural invariants shared by every module: offsets
/// partition the tokens, ids are in range, inverted lists are strictly
/// increasing and complete. Throws emvb::Error on the first violation.
void check_index(const Index& index);

/// Writes meta.json, centroids.f32, ivf.bin, token_cids.u32, pq_codes.u8,
/// offsets.u64, codebook.f32 and, when present, rotation.f32 and
/// residuals.f32. All binary files are little-endian and headerless.
void save_index(const Index& index, const std::filesystem::path& dir);

Index load_index(const std::filesystem::path& dir);
IndexMeta read_index_meta(const std::filesystem::path& dir);

/// Bytes per token embedding of the persisted corpus (token_cids.u32 plus
/// pq_codes.u8), excluding fixed-size files.
double bytes_per_embedding_on_disk(const std::filesystem::path& dir);

}  // namespace emvb
