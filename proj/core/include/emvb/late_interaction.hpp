#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "emvb/model.hpp"
#include "emvb/pq.hpp"

namespace emvb {

/// Asymmetric distance tables: at(i, s, c) = <sub-vector s of R q_i,
/// codeword c of sub-space s>. Rows of inactive terms are zero.
class ADCTables {
 public:
  ADCTables() = default;
  ADCTables(std::size_t m) : m_(m), values_(kQueryTerms * m * kCodewordsPerSubspace, 0.0f) {}

  std::size_t m() const noexcept { return m_; }
  float at(std::size_t term, std::size_t s, std::size_t c) const {
    return values_[(term * m_ + s) * kCodewordsPerSubspace + c];
  }
  float& at(std::size_t term, std::size_t s, std::size_t c) {
    return values_[(term * m_ + s) * kCodewordsPerSubspace + c];
  }
  /// m x 256 block of one term.
  std::span<const float> term(std::size_t i) const {
    return {values_.data() + i * m_ * kCodewordsPerSubspace, m_ * kCodewordsPerSubspace};
  }

 private:
  std::size_t m_ = 0;
  std::vector<float> values_;
};

ADCTables build_adc_tables(const QueryMatrix& q, const PQCodebook& pq);
void build_adc_tables(const QueryMatrix& q, const PQCodebook& pq, ADCTables& out);

/// Sum over sub-spaces of the table entries selected by one code tuple.
inline float adc_lookup(std::span<const float> term_table, std::span<const std::uint8_t> codes) {
  float acc = 0.0f;
  for (std::size_t s = 0; s < codes.size(); ++s) {
    acc += term_table[s * kCodewordsPerSubspace + codes[s]];
  }
  return acc;
}

/// q_term . r_pq of a corpus token, without decoding.
inline float residual_score(std::size_t term, std::size_t token, const ADCTables& adc,
                            const CompressedCorpus& corpus) {
  return adc_lookup(adc.term(term), corpus.codes(token));
}

struct LateInteractionStats {
  /// Residual dot products actually computed.
  std::uint64_t residual_evaluations = 0;
  /// Residual dot products the unfiltered max would compute (n_t per term).
  std::uint64_t unfiltered_evaluations = 0;

  double work_ratio() const noexcept {
    return unfiltered_evaluations == 0
               ? 0.0
               : static_cast<double>(residual_evaluations) /
                     static_cast<double>(unfiltered_evaluations);
  }
  LateInteractionStats& operator+=(const LateInteractionStats& o) noexcept {
    residual_evaluations += o.residual_evaluations;
    unfiltered_evaluations += o.unfiltered_evaluations;
    return *this;
  }
};

/// Filtered late interaction over one passage. tilde is the n_tokens x
/// kQueryTerms centroid score block, residual(i, j) returns q_i . r of the
/// passage's j-th token. For each active term, only tokens whose centroid
/// score exceeds th_r get a residual score; if none does, that term falls
/// back to the max over every token.
template <class ResidualFn>
float late_score_with(std::span<const float> tilde, std::size_t n_tokens, TermMask active_mask,
                      float th_r, ResidualFn&& residual, LateInteractionStats* stats = nullptr) {
  float total = 0.0f;
  std::uint64_t evaluated = 0;
  std::uint64_t active = 0;
  for (std::size_t i = 0; i < kQueryTerms; ++i) {
    if (((active_mask >> i) & 1u) == 0) continue;
    ++active;
    float best = -std::numeric_limits<float>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < n_tokens; ++j) {
      const float c = tilde[j * kQueryTerms + i];
      if (c > th_r) {
        const float v = c + residual(i, j);
        if (v > best) best = v;
        any = true;
        ++evaluated;
      }
    }
    if (!any) {
      for (std::size_t j = 0; j < n_tokens; ++j) {
        const float v = tilde[j * kQueryTerms + i] + residual(i, j);
        if (v > best) best = v;
      }
      evaluated += n_tokens;
    }
    total += best;
  }
  if (stats != nullptr) {
    stats->residual_evaluations += evaluated;
    stats->unfiltered_evaluations += active * n_tokens;
  }
  return total;
}

/// Filtered late interaction with PQ residuals.
float late_score(std::uint32_t passage, std::span<const float> tilde, const ADCTables& adc,
                 const CompressedCorpus& corpus, float th_r, TermMask active_mask,
                 LateInteractionStats* stats = nullptr);

/// Filtered late interaction with full-precision residuals (test mode).
/// exact_residuals is total_tokens x q.dim().
float late_score_exact(std::uint32_t passage, std::span<const float> tilde, const QueryMatrix& q,
                       std::span<const float> exact_residuals, const CompressedCorpus& corpus,
                       float th_r, LateInteractionStats* stats = nullptr);

/// Top k by score descending, ties to the lower id.
std::vector<ScoredPassage> final_topk(std::vector<ScoredPassage> scored, std::size_t k);

}  // namespace emvb
