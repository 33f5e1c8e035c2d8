#include "emvb/centroid_interaction.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <limits>

#include "emvb/error.hpp"
#include "emvb/simd.hpp"
#include "emvb/topk.hpp"

#if EMVB_HAVE_X86
#include <immintrin.h>
#endif

namespace emvb {
namespace {

constexpr std::size_t kHalf = kQueryTerms / 2;

float reduce_pairs(std::array<float, kHalf>& s) noexcept {
  for (std::size_t width = kHalf / 2; width > 0; width /= 2) {
    for (std::size_t k = 0; k < width; ++k) s[k] += s[k + width];
  }
  return s[0];
}

float centroid_score_scalar(std::span<const std::uint32_t> cids, const float* cs_t,
                            TermMask active_mask, float* tilde) noexcept {
  std::array<float, kQueryTerms> maxima;
  std::fill(maxima.begin(), maxima.end(), -std::numeric_limits<float>::infinity());
  for (std::size_t j = 0; j < cids.size(); ++j) {
    const float* src = cs_t + static_cast<std::size_t>(cids[j]) * kQueryTerms;
    float* dst = tilde + j * kQueryTerms;
    std::memcpy(dst, src, kQueryTerms * sizeof(float));
    for (std::size_t i = 0; i < kQueryTerms; ++i) maxima[i] = std::max(maxima[i], dst[i]);
  }
  for (std::size_t i = 0; i < kQueryTerms; ++i) {
    if (((active_mask >> i) & 1u) == 0) maxima[i] = 0.0f;
  }
  return reduce_term_maxima(maxima);
}

#if EMVB_HAVE_X86
EMVB_TARGET_AVX512
float centroid_score_avx512(std::span<const std::uint32_t> cids, const float* cs_t,
                            TermMask active_mask, float* tilde) noexcept {
  const float* first = cs_t + static_cast<std::size_t>(cids[0]) * kQueryTerms;
  __m512 max_l = _mm512_loadu_ps(first);
  __m512 max_h = _mm512_loadu_ps(first + kHalf);
  _mm512_storeu_ps(tilde, max_l);
  _mm512_storeu_ps(tilde + kHalf, max_h);
  for (std::size_t j = 1; j < cids.size(); ++j) {
    const float* src = cs_t + static_cast<std::size_t>(cids[j]) * kQueryTerms;
    const __m512 cur_l = _mm512_loadu_ps(src);
    const __m512 cur_h = _mm512_loadu_ps(src + kHalf);
    _mm512_storeu_ps(tilde + j * kQueryTerms, cur_l);
    _mm512_storeu_ps(tilde + j * kQueryTerms + kHalf, cur_h);
    // Take the current row where it is strictly greater.
    max_l = _mm512_mask_blend_ps(_mm512_cmp_ps_mask(cur_l, max_l, _CMP_GT_OQ), max_l, cur_l);
    max_h = _mm512_mask_blend_ps(_mm512_cmp_ps_mask(cur_h, max_h, _CMP_GT_OQ), max_h, cur_h);
  }
  max_l = _mm512_maskz_mov_ps(static_cast<__mmask16>(active_mask & 0xFFFFu), max_l);
  max_h = _mm512_maskz_mov_ps(static_cast<__mmask16>(active_mask >> kHalf), max_h);
  std::array<float, kHalf> sums;
  _mm512_storeu_ps(sums.data(), _mm512_add_ps(max_l, max_h));
  return reduce_pairs(sums);
}
#endif

}  // namespace

float reduce_term_maxima(std::span<const float, kQueryTerms> maxima) noexcept {
  std::array<float, kHalf> s;
  for (std::size_t k = 0; k < kHalf; ++k) s[k] = maxima[k] + maxima[k + kHalf];
  return reduce_pairs(s);
}

void transpose_scores(const ScoreMatrix& cs, ScoreMatrix& cs_t) {
  cs_t.resize(cs.cols, cs.rows);
  constexpr std::size_t kBlock = 64;
  for (std::size_t c0 = 0; c0 < cs.cols; c0 += kBlock) {
    const std::size_t c1 = std::min(cs.cols, c0 + kBlock);
    for (std::size_t i = 0; i < cs.rows; ++i) {
      const float* src = cs.values.data() + i * cs.cols;
      for (std::size_t c = c0; c < c1; ++c) cs_t.values[c * cs.rows + i] = src[c];
    }
  }
}

ScoreMatrix transpose_scores(const ScoreMatrix& cs) {
  ScoreMatrix out;
  transpose_scores(cs, out);
  return out;
}

float centroid_score(std::span<const std::uint32_t> token_cids, const ScoreMatrix& cs_t,
                     TermMask active_mask, std::span<float> tilde) {
  if (cs_t.cols != kQueryTerms) throw Error("transposed score matrix must have 32 columns");
  if (tilde.size() < token_cids.size() * kQueryTerms) throw Error("tilde buffer too small");
  if (token_cids.empty()) return 0.0f;
#if EMVB_HAVE_X86
  if (simd::active_isa() == simd::Isa::avx512) {
    return centroid_score_avx512(token_cids, cs_t.values.data(), active_mask, tilde.data());
  }
#endif
  return centroid_score_scalar(token_cids, cs_t.values.data(), active_mask, tilde.data());
}

float centroid_score(std::span<const std::uint32_t> token_cids, const ScoreMatrix& cs_t,
                     TermMask active_mask) {
  std::vector<float> tilde(token_cids.size() * kQueryTerms);
  return centroid_score(token_cids, cs_t, active_mask, tilde);
}

float centroid_score_untransposed(std::span<const std::uint32_t> token_cids,
                                  const ScoreMatrix& cs, TermMask active_mask) {
  if (cs.rows != kQueryTerms) throw Error("score matrix must have 32 rows");
  std::array<float, kQueryTerms> maxima{};
  if (token_cids.empty()) return 0.0f;
  for (std::size_t i = 0; i < kQueryTerms; ++i) {
    if (((active_mask >> i) & 1u) == 0) continue;
    const float* row = cs.values.data() + i * cs.cols;
    float best = -std::numeric_limits<float>::infinity();
    for (const auto c : token_cids) best = std::max(best, row[c]);
    maxima[i] = best;
  }
  return reduce_term_maxima(maxima);
}

std::vector<ScoredPassage> select_ndocs(std::vector<ScoredPassage> scored, std::size_t ndocs) {
  if (ndocs == 0) throw Error("ndocs must be at least 1");
  keep_top_k(scored, ndocs);
  return scored;
}

}  // namespace emvb
