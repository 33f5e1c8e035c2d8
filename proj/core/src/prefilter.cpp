#include "emvb/prefilter.hpp"

#include <algorithm>
#include <array>
#include <bit>

#include "emvb/error.hpp"
#include "emvb/simd.hpp"

#if EMVB_HAVE_X86
#include <immintrin.h>
#endif

namespace emvb {
namespace {

std::uint32_t accumulate_words_scalar(std::span<const std::uint32_t> cids,
                                      const std::uint32_t* words) noexcept {
  std::uint32_t mask = 0;
  for (const auto c : cids) mask |= words[c];
  return mask;
}

#if EMVB_HAVE_X86
EMVB_TARGET_AVX512
std::uint32_t accumulate_words_avx512(std::span<const std::uint32_t> cids,
                                      const std::uint32_t* words) noexcept {
  __m512i acc = _mm512_setzero_si512();
  const std::size_t n = cids.size();
  std::size_t j = 0;
  for (; j + 16 <= n; j += 16) {
    const __m512i idx = _mm512_loadu_si512(cids.data() + j);
    acc = _mm512_or_si512(acc, _mm512_i32gather_epi32(idx, words, 4));
  }
  if (j < n) {
    const __mmask16 tail = static_cast<__mmask16>((1u << (n - j)) - 1u);
    const __m512i idx = _mm512_maskz_loadu_epi32(tail, cids.data() + j);
    acc = _mm512_or_si512(
        acc, _mm512_mask_i32gather_epi32(_mm512_setzero_si512(), tail, idx, words, 4));
  }
  return static_cast<std::uint32_t>(_mm512_reduce_or_epi32(acc));
}
#endif

}  // namespace

void StackedBitVectors::reset(std::size_t num_centroids) { words_.assign(num_centroids, 0u); }

void StackedBitVectors::add_term(std::size_t term, std::span<const std::uint32_t> close_ids) {
  if (term >= kQueryTerms) throw Error("query term index out of range");
  const std::uint32_t bit = std::uint32_t{1} << term;
  for (const auto c : close_ids) {
    if (c >= words_.size()) throw Error("centroid id out of range");
    words_[c] |= bit;
  }
}

StackedBitVectors build_stacked_bitvectors(const ScoreMatrix& cs, float th, TermMask active_mask,
                                           SelectVariant variant) {
  if (cs.rows > kQueryTerms) throw Error("score matrix has more than 32 query rows");
  StackedBitVectors bv(cs.cols);
  std::vector<std::uint32_t> close(cs.cols);
  for (std::size_t i = 0; i < cs.rows; ++i) {
    if (((active_mask >> i) & 1u) == 0) continue;
    const std::size_t n = select_above_threshold(cs.row(i), th, variant, close);
    bv.add_term(i, std::span<const std::uint32_t>(close.data(), n));
  }
  return bv;
}

void build_stacked_bitvectors(std::span<const std::vector<std::uint32_t>> survivors,
                              TermMask active_mask, StackedBitVectors& out) {
  for (std::size_t i = 0; i < survivors.size() && i < kQueryTerms; ++i) {
    if (((active_mask >> i) & 1u) != 0) out.add_term(i, survivors[i]);
  }
}

std::uint32_t prefilter_score(std::span<const std::uint32_t> token_cids,
                              const StackedBitVectors& bv) {
  const std::uint32_t* words = bv.words().data();
#if EMVB_HAVE_X86
  if (simd::active_isa() == simd::Isa::avx512) {
    return static_cast<std::uint32_t>(std::popcount(accumulate_words_avx512(token_cids, words)));
  }
#endif
  return static_cast<std::uint32_t>(std::popcount(accumulate_words_scalar(token_cids, words)));
}

void select_candidates(std::span<const std::uint32_t> candidates, const StackedBitVectors& bv,
                       const CompressedCorpus& corpus, std::size_t n_filter,
                       std::vector<std::uint32_t>& scores, std::vector<std::uint32_t>& out) {
  std::vector<std::uint32_t> sorted_copy;
  if (!std::is_sorted(candidates.begin(), candidates.end())) {
    sorted_copy.assign(candidates.begin(), candidates.end());
    std::sort(sorted_copy.begin(), sorted_copy.end());
    candidates = sorted_copy;
  }

  // Scores live in [0, 32]: bucket them, highest score first, ids ascending
  // within a bucket.
  std::array<std::size_t, kQueryTerms + 2> start{};
  scores.resize(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores[i] = prefilter_score(corpus.passage_cids(candidates[i]), bv);
    ++start[kQueryTerms - scores[i] + 1];
  }
  for (std::size_t b = 1; b < start.size(); ++b) start[b] += start[b - 1];

  out.resize(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out[start[kQueryTerms - scores[i]]++] = candidates[i];
  }
  if (out.size() > n_filter) out.resize(n_filter);
}

std::vector<std::uint32_t> select_candidates(std::span<const std::uint32_t> candidates,
                                             const StackedBitVectors& bv,
                                             const CompressedCorpus& corpus,
                                             std::size_t n_filter) {
  std::vector<std::uint32_t> scores;
  std::vector<std::uint32_t> out;
  select_candidates(candidates, bv, corpus, n_filter, scores, out);
  return out;
}

PerTermBitVectors::PerTermBitVectors(std::size_t num_centroids)
    : words_per_term_((num_centroids + 63) / 64), bits_(kQueryTerms * words_per_term_, 0) {}

void PerTermBitVectors::add_term(std::size_t term, std::span<const std::uint32_t> close_ids) {
  if (term >= kQueryTerms) throw Error("query term index out of range");
  for (const auto c : close_ids) bits_[term * words_per_term_ + (c >> 6)] |= std::uint64_t{1} << (c & 63);
}

std::uint32_t prefilter_score_per_term(std::span<const std::uint32_t> token_cids,
                                       const PerTermBitVectors& bv) {
  std::uint32_t count = 0;
  for (std::size_t i = 0; i < kQueryTerms; ++i) {
    for (const auto c : token_cids) {
      if (bv.contains(i, c)) {
        ++count;
        break;
      }
    }
  }
  return count;
}

}  // namespace emvb
