#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "emvb/pq.hpp"

namespace emvb {

/// Number of query terms. One 32-bit word holds one bit per term.
inline constexpr std::size_t kQueryTerms = 32;

/// Tolerance on the L2 norm of every stored unit vector.
inline constexpr float kNormTolerance = 1e-4f;

using TermMask = std::uint32_t;

/// Ragged, row-major token embeddings: passage p owns the tokens in
/// [offsets[p], offsets[p + 1]).
class TokenEmbeddingCollection {
 public:
  TokenEmbeddingCollection() = default;
  explicit TokenEmbeddingCollection(std::size_t dim);

  /// Throws emvb::Error if offsets are not a non-decreasing prefix array
  /// starting at 0 or data does not hold offsets.back() * dim floats.
  TokenEmbeddingCollection(std::size_t dim, std::vector<float> data,
                           std::vector<std::uint64_t> offsets);

  /// Appends a passage of tokens.size() / dim tokens.
  void add_passage(std::span<const float> tokens);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t num_passages() const noexcept { return offsets_.size() - 1; }
  std::size_t total_tokens() const noexcept { return offsets_.back(); }
  bool empty() const noexcept { return num_passages() == 0; }

  std::size_t passage_length(std::size_t p) const { return offsets_[p + 1] - offsets_[p]; }
  std::span<const float> passage(std::size_t p) const {
    return {data_.data() + offsets_[p] * dim_, passage_length(p) * dim_};
  }
  std::span<const float> token(std::size_t t) const { return {data_.data() + t * dim_, dim_}; }

  std::span<const float> data() const noexcept { return data_; }
  std::span<const std::uint64_t> offsets() const noexcept { return offsets_; }

 private:
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::vector<std::uint64_t> offsets_{0};
};

/// Nested passage -> token -> component form, as produced by external code
/// that has not been checked yet.
using RaggedPassages = std::vector<std::vector<std::vector<float>>>;

enum class ViolationKind { dimension_mismatch, not_normalized, empty_passage };

struct Violation {
  ViolationKind kind;
  std::size_t passage = 0;
  std::size_t token = 0;  // index within the passage
  std::string detail;
};

std::vector<Violation> validate_collection(const TokenEmbeddingCollection& coll);
std::vector<Violation> validate_collection(std::size_t dim, const RaggedPassages& passages);

/// Throws emvb::Error listing the first violations if any are found.
TokenEmbeddingCollection make_collection(std::size_t dim, const RaggedPassages& passages);

std::string describe(const Violation& v);

/// Compressed sparse rows: list c is ids[offsets[c], offsets[c + 1]).
struct InvertedLists {
  std::vector<std::uint64_t> offsets{0};
  std::vector<std::uint32_t> ids;

  std::size_t num_lists() const noexcept { return offsets.size() - 1; }
  std::span<const std::uint32_t> list(std::size_t c) const {
    return {ids.data() + offsets[c], static_cast<std::size_t>(offsets[c + 1] - offsets[c])};
  }
  bool operator==(const InvertedLists&) const = default;
};

struct CentroidIndex {
  std::size_t dim = 0;
  std::vector<float> centroids;  // num_centroids x dim, row-major
  InvertedLists inverted_lists;

  std::size_t num_centroids() const noexcept { return dim == 0 ? 0 : centroids.size() / dim; }
  std::span<const float> centroid(std::size_t c) const { return {centroids.data() + c * dim, dim}; }

  bool operator==(const CentroidIndex&) const = default;
};

struct CompressedCorpus {
  std::vector<std::uint32_t> token_cids;
  std::vector<std::uint8_t> pq_codes;  // total_tokens x m, token-major
  std::vector<std::uint64_t> passage_offsets{0};
  PQCodebook pq;

  std::size_t num_passages() const noexcept { return passage_offsets.size() - 1; }
  std::size_t total_tokens() const noexcept { return token_cids.size(); }
  std::size_t passage_begin(std::size_t p) const { return passage_offsets[p]; }
  std::size_t passage_length(std::size_t p) const {
    return passage_offsets[p + 1] - passage_offsets[p];
  }
  std::span<const std::uint32_t> passage_cids(std::size_t p) const {
    return {token_cids.data() + passage_offsets[p], passage_length(p)};
  }
  std::span<const std::uint8_t> codes(std::size_t token) const {
    return {pq_codes.data() + token * pq.m(), pq.m()};
  }

  /// Centroid id plus one byte per sub-space.
  std::size_t bytes_per_embedding() const noexcept { return sizeof(std::uint32_t) + pq.m(); }

  bool operator==(const CompressedCorpus&) const = default;
};

/// n_q x d query terms, zero-padded. Bit i of active_mask() marks term i as a
/// real query token.
class QueryMatrix {
 public:
  QueryMatrix() = default;
  explicit QueryMatrix(std::size_t dim);

  /// rows holds n x dim floats. Terms beyond kQueryTerms are dropped with a
  /// warning; all-zero rows stay inactive padding. Throws if an active row is
  /// not unit length.
  static QueryMatrix from_rows(std::span<const float> rows, std::size_t dim);

  void set_term(std::size_t i, std::span<const float> values);

  std::size_t dim() const noexcept { return dim_; }
  std::span<const float> terms() const noexcept { return terms_; }
  std::span<const float> term(std::size_t i) const { return {terms_.data() + i * dim_, dim_}; }
  TermMask active_mask() const noexcept { return active_mask_; }
  bool is_active(std::size_t i) const noexcept { return (active_mask_ >> i) & 1u; }
  std::size_t num_active() const noexcept;

 private:
  std::size_t dim_ = 0;
  std::vector<float> terms_;
  TermMask active_mask_ = 0;
};

struct SearchConfig {
  std::size_t nprobe = 4;
  float th = 0.4f;
  std::size_t n_filter = 1000;
  std::size_t ndocs = 40;
  float th_r = 0.5f;
  std::size_t k = 10;

  /// nprobe = 4, ndocs = 4k and n_filter = max(1000, ndocs).
  static SearchConfig for_k(std::size_t k);

  /// Throws unless k <= ndocs <= n_filter, nprobe >= 1 and k >= 1.
  void validate() const;
};

/// Dense row-major float matrix.
struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  ScoreMatrix() = default;
  ScoreMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0f) {}

  void resize(std::size_t r, std::size_t c) {
    rows = r;
    cols = c;
    values.resize(r * c);
  }
  float& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<float> row(std::size_t r) { return {values.data() + r * cols, cols}; }
  std::span<const float> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

struct ScoredPassage {
  std::uint32_t id = 0;
  float score = 0.0f;

  bool operator==(const ScoredPassage&) const = default;
};

/// Ranking order: score descending, then id ascending.
inline bool ranks_before(const ScoredPassage& a, const ScoredPassage& b) noexcept {
  return a.score > b.score || (a.score == b.score && a.id < b.id);
}

float l2_norm(std::span<const float> v) noexcept;
float dot(std::span<const float> a, std::span<const float> b) noexcept;

}  // namespace emvb
