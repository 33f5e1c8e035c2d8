#include "emvb/late_interaction.hpp"

#include <Eigen/Core>

#include "emvb/error.hpp"
#include "emvb/topk.hpp"

namespace emvb {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void build_adc_tables(const QueryMatrix& q, const PQCodebook& pq, ADCTables& out) {
  if (q.dim() != pq.dim()) throw Error("query and codebook dimensions differ");
  const std::size_t dim = pq.dim();
  const std::size_t m = pq.m();
  const std::size_t ds = pq.sub_dim();
  out = ADCTables(m);

  RowMatrix rotated = RowMatrix::Zero(kQueryTerms, static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < kQueryTerms; ++i) {
    if (!q.is_active(i)) continue;
    pq.rotate(q.term(i), std::span<float>(rotated.row(static_cast<Eigen::Index>(i)).data(), dim));
  }

  for (std::size_t s = 0; s < m; ++s) {
    const Eigen::Map<const RowMatrix> book(pq.codeword(s, 0).data(),
                                           static_cast<Eigen::Index>(kCodewordsPerSubspace),
                                           static_cast<Eigen::Index>(ds));
    const RowMatrix table =
        rotated.middleCols(static_cast<Eigen::Index>(s * ds), static_cast<Eigen::Index>(ds)) *
        book.transpose();
    for (std::size_t i = 0; i < kQueryTerms; ++i) {
      if (!q.is_active(i)) continue;
      for (std::size_t c = 0; c < kCodewordsPerSubspace; ++c) {
        out.at(i, s, c) = table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      }
    }
  }
}

ADCTables build_adc_tables(const QueryMatrix& q, const PQCodebook& pq) {
  ADCTables out;
  build_adc_tables(q, pq, out);
  return out;
}

float late_score(std::uint32_t passage, std::span<const float> tilde, const ADCTables& adc,
                 const CompressedCorpus& corpus, float th_r, TermMask active_mask,
                 LateInteractionStats* stats) {
  const std::size_t first = corpus.passage_begin(passage);
  const std::size_t n = corpus.passage_length(passage);
  const std::size_t m = corpus.pq.m();
  const std::uint8_t* codes = corpus.pq_codes.data() + first * m;
  return late_score_with(
      tilde, n, active_mask, th_r,
      [&](std::size_t i, std::size_t j) {
        return adc_lookup(adc.term(i), std::span<const std::uint8_t>(codes + j * m, m));
      },
      stats);
}

float late_score_exact(std::uint32_t passage, std::span<const float> tilde, const QueryMatrix& q,
                       std::span<const float> exact_residuals, const CompressedCorpus& corpus,
                       float th_r, LateInteractionStats* stats) {
  const std::size_t dim = q.dim();
  const std::size_t first = corpus.passage_begin(passage);
  const std::size_t n = corpus.passage_length(passage);
  return late_score_with(
      tilde, n, q.active_mask(), th_r,
      [&](std::size_t i, std::size_t j) {
        return dot(q.term(i), exact_residuals.subspan((first + j) * dim, dim));
      },
      stats);
}

std::vector<ScoredPassage> final_topk(std::vector<ScoredPassage> scored, std::size_t k) {
  if (k == 0) throw Error("k must be at least 1");
  keep_top_k(scored, k);
  return scored;
}

}  // namespace emvb
