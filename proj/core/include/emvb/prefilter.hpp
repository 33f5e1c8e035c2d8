#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "emvb/model.hpp"
#include "emvb/threshold_select.hpp"

namespace emvb {

/// One 32-bit word per centroid; bit i of word c is set iff centroid c is
/// in the close set of query term i. The n_q logical bit vectors are stacked
/// so a single load tests membership for every term at once.
class StackedBitVectors {
 public:
  StackedBitVectors() = default;
  explicit StackedBitVectors(std::size_t num_centroids) : words_(num_centroids, 0u) {}

  /// Resizes to num_centroids and zeroes every word.
  void reset(std::size_t num_centroids);

  /// Sets bit term in the word of every id in close_ids.
  void add_term(std::size_t term, std::span<const std::uint32_t> close_ids);

  std::size_t num_centroids() const noexcept { return words_.size(); }
  std::span<const std::uint32_t> words() const noexcept { return words_; }
  std::uint32_t word(std::size_t c) const { return words_[c]; }
  bool contains(std::size_t term, std::size_t c) const { return (words_[c] >> term) & 1u; }

 private:
  std::vector<std::uint32_t> words_;
};

/// Bit (i, c) set iff cs.at(i, c) > th and term i is active.
StackedBitVectors build_stacked_bitvectors(const ScoreMatrix& cs, float th, TermMask active_mask,
                                           SelectVariant variant = SelectVariant::vectorized_if);

/// Builds from per-term survivor lists of select_above_threshold; entries of
/// inactive terms are ignored.
void build_stacked_bitvectors(std::span<const std::vector<std::uint32_t>> survivors,
                              TermMask active_mask, StackedBitVectors& out);

/// Number of query terms with at least one passage token whose centroid is
/// close to it: popcount of the OR of the words of all token centroids.
std::uint32_t prefilter_score(std::span<const std::uint32_t> token_cids,
                              const StackedBitVectors& bv);

/// The n_filter candidates with the highest prefilter_score, ordered by
/// score descending then id ascending. Cuts strictly at n_filter.
std::vector<std::uint32_t> select_candidates(std::span<const std::uint32_t> candidates,
                                             const StackedBitVectors& bv,
                                             const CompressedCorpus& corpus,
                                             std::size_t n_filter);

/// Scratch-reusing form; scores receives the prefilter score per candidate.
void select_candidates(std::span<const std::uint32_t> candidates, const StackedBitVectors& bv,
                       const CompressedCorpus& corpus, std::size_t n_filter,
                       std::vector<std::uint32_t>& scores, std::vector<std::uint32_t>& out);

/// Baseline layout: one independent bit vector of num_centroids bits per
/// query term.
class PerTermBitVectors {
 public:
  explicit PerTermBitVectors(std::size_t num_centroids);

  void add_term(std::size_t term, std::span<const std::uint32_t> close_ids);
  bool contains(std::size_t term, std::size_t c) const {
    return (bits_[term * words_per_term_ + (c >> 6)] >> (c & 63)) & 1u;
  }

 private:
  std::size_t words_per_term_;
  std::vector<std::uint64_t> bits_;
};

/// Same count as prefilter_score, testing each term's bit vector separately.
std::uint32_t prefilter_score_per_term(std::span<const std::uint32_t> token_cids,
                                       const PerTermBitVectors& bv);

}  // namespace emvb
