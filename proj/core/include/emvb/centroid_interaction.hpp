#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "emvb/model.hpp"

namespace emvb {

/// cs_t.at(c, i) = cs.at(i, c).
ScoreMatrix transpose_scores(const ScoreMatrix& cs);
void transpose_scores(const ScoreMatrix& cs, ScoreMatrix& cs_t);

/// Approximate passage score: sum over active terms of the max centroid
/// score over the passage tokens. cs_t is |C| x kQueryTerms. The gathered
/// n_t x kQueryTerms block is written to tilde, which must hold
/// token_cids.size() * kQueryTerms floats.
///
/// The scalar and AVX-512 paths return bit-identical values: column maxima
/// are exact and the final sum uses one fixed reduction order.
float centroid_score(std::span<const std::uint32_t> token_cids, const ScoreMatrix& cs_t,
                     TermMask active_mask, std::span<float> tilde);

float centroid_score(std::span<const std::uint32_t> token_cids, const ScoreMatrix& cs_t,
                     TermMask active_mask);

/// Same value computed on the untransposed n_q x |C| matrix, reading one
/// strided column per token. Kept as the layout baseline for benchmarks.
float centroid_score_untransposed(std::span<const std::uint32_t> token_cids,
                                  const ScoreMatrix& cs, TermMask active_mask);

/// Sum of 32 per-term maxima in the reduction order shared by every path.
float reduce_term_maxima(std::span<const float, kQueryTerms> maxima) noexcept;

/// Top ndocs by score descending, ties to the lower id.
std::vector<ScoredPassage> select_ndocs(std::vector<ScoredPassage> scored, std::size_t ndocs);

}  // namespace emvb
