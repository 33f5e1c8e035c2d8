#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "emvb/late_interaction.hpp"
#include "support/test_support.hpp"

namespace emvb {
namespace {

PQCodebook random_codebook(std::mt19937_64& rng, std::size_t dim, std::size_t m) {
  std::normal_distribution<float> g(0.0f, 0.2f);
  std::vector<float> cw(dim * kCodewordsPerSubspace);
  for (float& x : cw) x = g(rng);
  return PQCodebook(dim, m, std::move(cw));
}

/// One passage per entry of lengths, random centroid ids and codes.
CompressedCorpus random_corpus(std::mt19937_64& rng, const PQCodebook& pq,
                               const std::vector<std::size_t>& lengths, std::size_t nc) {
  CompressedCorpus corpus;
  corpus.pq = pq;
  corpus.passage_offsets = {0};
  for (const auto n : lengths) {
    for (std::size_t t = 0; t < n; ++t) {
      corpus.token_cids.push_back(static_cast<std::uint32_t>(rng() % nc));
      for (std::size_t s = 0; s < pq.m(); ++s) {
        corpus.pq_codes.push_back(static_cast<std::uint8_t>(rng() % kCodewordsPerSubspace));
      }
    }
    corpus.passage_offsets.push_back(corpus.token_cids.size());
  }
  return corpus;
}

std::vector<float> random_tilde(std::mt19937_64& rng, std::size_t n_tokens) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> tilde(n_tokens * kQueryTerms);
  for (float& x : tilde) x = u(rng);
  return tilde;
}

/// max_j (tilde + residual) per active term, evaluated on every token.
double unfiltered_oracle(std::span<const float> tilde, std::size_t n, TermMask mask,
                         const std::function<double(std::size_t, std::size_t)>& residual) {
  double total = 0.0;
  for (std::size_t i = 0; i < kQueryTerms; ++i) {
    if (((mask >> i) & 1u) == 0) continue;
    double best = -1e30;
    for (std::size_t j = 0; j < n; ++j) best = std::max(best, tilde[j * kQueryTerms + i] + residual(i, j));
    total += best;
  }
  return total;
}

TEST(ADCTables, ZeroForInactiveTerms) {
  std::mt19937_64 rng(81);
  const auto pq = random_codebook(rng, 16, 4);
  const QueryMatrix q(16);
  const auto adc = build_adc_tables(q, pq);
  for (std::size_t i = 0; i < kQueryTerms; ++i) {
    for (const float x : adc.term(i)) EXPECT_EQ(x, 0.0f);
  }
}

TEST(ADCTables, SingleSubspaceSelfDot) {
  std::mt19937_64 rng(82);
  const std::size_t dim = 8;
  std::vector<float> cw(dim * kCodewordsPerSubspace, 0.0f);
  const auto q0 = testing::random_unit(rng, dim);
  std::copy(q0.begin(), q0.end(), cw.begin() + 5 * dim);
  const PQCodebook pq(dim, 1, cw);
  QueryMatrix q(dim);
  q.set_term(0, q0);
  const auto adc = build_adc_tables(q, pq);
  EXPECT_NEAR(adc.at(0, 0, 5), 1.0f, 1e-6f);
}

TEST(ADCTables, LookupMatchesDirectAndDecodedDot) {
  std::mt19937_64 rng(83);
  for (const std::size_t m : {16u, 32u}) {
    const std::size_t dim = 64;
    const auto pq = random_codebook(rng, dim, m);
    const auto q = testing::random_query(rng, dim, 20);
    const auto adc = build_adc_tables(q, pq);
    std::vector<std::uint8_t> codes(m);
    std::vector<float> decoded(dim);
    for (int rep = 0; rep < 200; ++rep) {
      for (auto& c : codes) c = static_cast<std::uint8_t>(rng() % 256);
      pq.decode(codes, decoded);
      for (std::size_t i = 0; i < 20; ++i) {
        double direct = 0.0;
        for (std::size_t s = 0; s < m; ++s) {
          direct += testing::dot_double(q.term(i).subspan(s * pq.sub_dim(), pq.sub_dim()),
                                        pq.codeword(s, codes[s]));
        }
        const double via_decode = testing::dot_double(q.term(i), decoded);
        const float got = adc_lookup(adc.term(i), codes);
        EXPECT_NEAR(got, direct, 1e-6);
        EXPECT_TRUE(testing::relative_close(got, via_decode, 1e-5));
      }
    }
  }
}

TEST(LateScore, ExtremeThresholdsEqualUnfilteredMax) {
  std::mt19937_64 rng(84);
  const auto pq = random_codebook(rng, 32, 16);
  const auto q = testing::random_query(rng, 32, 25);
  const auto adc = build_adc_tables(q, pq);
  const auto corpus = random_corpus(rng, pq, {1, 7, 30, 64}, 10);
  for (std::uint32_t p = 0; p < 4; ++p) {
    const auto n = corpus.passage_length(p);
    const auto tilde = random_tilde(rng, n);
    const std::size_t first = corpus.passage_begin(p);
    const auto oracle = unfiltered_oracle(tilde, n, q.active_mask(), [&](auto i, auto j) {
      return static_cast<double>(residual_score(i, first + j, adc, corpus));
    });
    for (const float th_r : {-2.0f, 2.0f}) {
      LateInteractionStats stats;
      const float got = late_score(p, tilde, adc, corpus, th_r, q.active_mask(), &stats);
      EXPECT_TRUE(testing::relative_close(got, oracle, 1e-6)) << got << " vs " << oracle;
      EXPECT_EQ(stats.residual_evaluations, stats.unfiltered_evaluations);
      EXPECT_EQ(stats.unfiltered_evaluations, 25u * n);
    }
  }
}

TEST(LateScore, FilteredMatchesBruteForceAndCountsCalls) {
  std::mt19937_64 rng(85);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rng() % 40;
    const auto tilde = random_tilde(rng, n);
    std::vector<float> residual(kQueryTerms * n);
    std::uniform_real_distribution<float> u(-0.3f, 0.3f);
    for (float& x : residual) x = u(rng);
    const TermMask mask = static_cast<TermMask>(rng()) | 1u;
    const float th_r = 0.5f;

    double expected = 0.0;
    std::uint64_t expected_calls = 0;
    for (std::size_t i = 0; i < kQueryTerms; ++i) {
      if (((mask >> i) & 1u) == 0) continue;
      std::vector<std::size_t> kept;
      for (std::size_t j = 0; j < n; ++j) {
        if (tilde[j * kQueryTerms + i] > th_r) kept.push_back(j);
      }
      if (kept.empty()) {
        for (std::size_t j = 0; j < n; ++j) kept.push_back(j);
      }
      double best = -1e30;
      for (const auto j : kept) {
        best = std::max(best, static_cast<double>(tilde[j * kQueryTerms + i]) + residual[i * n + j]);
      }
      expected += best;
      expected_calls += kept.size();
    }

    std::uint64_t calls = 0;
    LateInteractionStats stats;
    const float got = late_score_with(
        tilde, n, mask, th_r,
        [&](std::size_t i, std::size_t j) {
          ++calls;
          return residual[i * n + j];
        },
        &stats);
    EXPECT_TRUE(testing::relative_close(got, expected, 1e-5));
    EXPECT_EQ(calls, expected_calls);
    EXPECT_EQ(stats.residual_evaluations, expected_calls);
  }
}

TEST(LateScore, FilterIsSoundWhenResidualsAreSmall) {
  // If every residual is below delta and the best centroid score clears
  // th_r + 2 delta, filtering cannot change the max.
  std::mt19937_64 rng(86);
  const float delta = 0.05f;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng() % 20;
    auto tilde = random_tilde(rng, n);
    std::vector<float> residual(kQueryTerms * n);
    std::uniform_real_distribution<float> u(-delta, delta);
    for (float& x : residual) x = u(rng);
    for (std::size_t i = 0; i < kQueryTerms; ++i) tilde[(rng() % n) * kQueryTerms + i] = 0.8f;
    auto fn = [&](std::size_t i, std::size_t j) { return residual[i * n + j]; };
    const float filtered = late_score_with(tilde, n, ~TermMask{0}, 0.6f, fn);
    const float unfiltered = late_score_with(tilde, n, ~TermMask{0}, -2.0f, fn);
    EXPECT_EQ(filtered, unfiltered);
  }
}

TEST(LateScoreExact, DecomposesFullDotProduct) {
  std::mt19937_64 rng(87);
  const std::size_t dim = 16, nc = 6;
  std::vector<float> centroids;
  for (std::size_t c = 0; c < nc; ++c) {
    const auto v = testing::random_unit(rng, dim);
    centroids.insert(centroids.end(), v.begin(), v.end());
  }
  const auto coll = testing::random_collection(rng, 5, 1, 9, dim);
  const auto pq = random_codebook(rng, dim, 4);
  CompressedCorpus corpus = random_corpus(rng, pq, {}, nc);
  corpus.passage_offsets.assign(coll.offsets().begin(), coll.offsets().end());
  std::vector<float> residuals;
  for (std::size_t t = 0; t < coll.total_tokens(); ++t) {
    const auto c = static_cast<std::uint32_t>(rng() % nc);
    corpus.token_cids.push_back(c);
    for (std::size_t d = 0; d < dim; ++d) residuals.push_back(coll.token(t)[d] - centroids[c * dim + d]);
  }
  const auto q = testing::random_query(rng, dim, 9);
  for (std::uint32_t p = 0; p < 5; ++p) {
    const auto n = coll.passage_length(p);
    std::vector<float> tilde(n * kQueryTerms, 0.0f);
    for (std::size_t j = 0; j < n; ++j) {
      const auto c = corpus.token_cids[corpus.passage_begin(p) + j];
      for (std::size_t i = 0; i < kQueryTerms; ++i) {
        tilde[j * kQueryTerms + i] = dot(q.term(i), std::span<const float>(centroids).subspan(c * dim, dim));
      }
    }
    const float got = late_score_exact(p, tilde, q, residuals, corpus, -2.0f);
    EXPECT_TRUE(testing::relative_close(got, testing::brute_force_maxsim(q, coll, p), 1e-5));
  }
}

TEST(FinalTopk, TiesToLowerId) {
  const std::vector<ScoredPassage> scored = {{9, 1.0f}, {2, 1.0f}, {5, 2.0f}};
  EXPECT_EQ(final_topk(scored, 2), (std::vector<ScoredPassage>{{5, 2.0f}, {2, 1.0f}}));
}

}  // namespace
}  // namespace emvb
