#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "emvb/error.hpp"
#include "emvb/index_builder.hpp"
#include "emvb/kmeans.hpp"
#include "support/test_support.hpp"

namespace emvb {
namespace {

double mean_sq_residual(const TokenEmbeddingCollection& coll, const CentroidIndex& ci) {
  const auto a = assign_tokens(coll, ci);
  double total = 0.0;
  for (std::size_t t = 0; t < coll.total_tokens(); ++t) {
    const auto x = coll.token(t);
    const auto c = ci.centroid(a[t]);
    for (std::size_t d = 0; d < coll.dim(); ++d) total += (x[d] - c[d]) * (x[d] - c[d]);
  }
  return total / static_cast<double>(coll.total_tokens());
}

TEST(TrainCentroids, OneCentroidPerToken) {
  std::mt19937_64 rng(21);
  const auto coll = testing::random_collection(rng, 6, 2, 5, 8);
  const auto ci = train_centroids(coll, coll.total_tokens(), 5, 7);
  EXPECT_EQ(ci.num_centroids(), coll.total_tokens());
  EXPECT_NEAR(mean_sq_residual(coll, ci), 0.0, 1e-10);
}

TEST(TrainCentroids, SingleCentroidIsNormalizedMean) {
  std::mt19937_64 rng(22);
  const auto coll = testing::random_collection(rng, 10, 1, 6, 5);
  const auto ci = train_centroids(coll, 1, 3, 1);
  std::vector<double> mean(5, 0.0);
  for (std::size_t t = 0; t < coll.total_tokens(); ++t) {
    for (std::size_t d = 0; d < 5; ++d) mean[d] += coll.token(t)[d];
  }
  double norm = 0.0;
  for (const double v : mean) norm += v * v;
  norm = std::sqrt(norm);
  for (std::size_t d = 0; d < 5; ++d) EXPECT_NEAR(ci.centroids[d], mean[d] / norm, 1e-5);
}

TEST(TrainCentroids, MoreIterationsReduceError) {
  std::mt19937_64 rng(23);
  const auto coll = testing::random_collection(rng, 20, 5, 5, 16);  // 100 tokens
  ASSERT_EQ(coll.total_tokens(), 100u);
  const double one = mean_sq_residual(coll, train_centroids(coll, 8, 1, 5));
  const double ten = mean_sq_residual(coll, train_centroids(coll, 8, 10, 5));
  EXPECT_LT(ten, one);
}

TEST(TrainCentroids, ErrorHistoryNonIncreasingAndUnitCentroids) {
  std::mt19937_64 rng(24);
  const auto coll = testing::random_collection(rng, 60, 3, 8, 16);
  KMeansOptions opts{.k = 12, .iters = 15, .seed = 3, .spherical = true};
  const auto result = kmeans(coll.data(), 16, opts);
  ASSERT_EQ(result.error_history.size(), 15u);
  for (std::size_t i = 1; i < result.error_history.size(); ++i) {
    EXPECT_LE(result.error_history[i], result.error_history[i - 1] + 1e-6);
  }
  for (std::size_t c = 0; c < 12; ++c) {
    EXPECT_NEAR(l2_norm(std::span<const float>(result.centroids).subspan(c * 16, 16)), 1.0f, 1e-4f);
  }
}

TEST(TrainCentroids, DeterministicGivenSeed) {
  std::mt19937_64 rng(25);
  const auto coll = testing::random_collection(rng, 30, 2, 6, 8);
  const auto a = train_centroids(coll, 10, 5, 99);
  const auto b = train_centroids(coll, 10, 5, 99);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(assign_tokens(coll, a), assign_tokens(coll, b));
}

TEST(TrainCentroids, Errors) {
  std::mt19937_64 rng(26);
  const auto coll = testing::random_collection(rng, 2, 2, 2, 4);
  EXPECT_THROW(train_centroids(coll, 5, 3, 0), Error);
  EXPECT_THROW(train_centroids(TokenEmbeddingCollection(4), 1, 3, 0), Error);
  EXPECT_THROW(train_centroids(coll, 2, 0, 0), Error);
}

CentroidIndex axis_centroids(std::size_t k, std::size_t dim) {
  CentroidIndex ci;
  ci.dim = dim;
  ci.centroids.assign(k * dim, 0.0f);
  for (std::size_t c = 0; c < k; ++c) ci.centroids[c * dim + c] = 1.0f;
  return ci;
}

TEST(AssignTokens, SelfMatchAndTieBreak) {
  const auto ci = axis_centroids(8, 8);
  TokenEmbeddingCollection coll(8);
  std::vector<float> t(16, 0.0f);
  t[5] = 1.0f;                                             // equals centroid 5
  t[8 + 2] = t[8 + 7] = static_cast<float>(1.0 / std::sqrt(2.0));  // equidistant from 2 and 7
  coll.add_passage(t);
  const auto a = assign_tokens(coll, ci);
  EXPECT_EQ(a[0], 5u);
  EXPECT_EQ(a[1], 2u);

  EXPECT_THROW(assign_tokens(coll, axis_centroids(4, 4)), Error);
}

TEST(AssignTokens, MatchesScoreMatrixArgmax) {
  std::mt19937_64 rng(27);
  const auto coll = testing::random_collection(rng, 10, 5, 5, 12);
  CentroidIndex ci;
  ci.dim = 12;
  for (int c = 0; c < 4; ++c) {
    const auto v = testing::random_unit(rng, 12);
    ci.centroids.insert(ci.centroids.end(), v.begin(), v.end());
  }
  const auto a = assign_tokens(coll, ci);
  for (std::size_t t = 0; t < 50; ++t) {
    std::size_t best = 0;
    double best_score = -2.0;
    for (std::size_t c = 0; c < 4; ++c) {
      const double s = testing::dot_double(coll.token(t), ci.centroid(c));
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    EXPECT_EQ(a[t], best) << "token " << t;
  }
}

TEST(BuildInvertedLists, AllInOneCentroid) {
  const std::vector<std::uint32_t> assign(7, 0);
  const std::vector<std::uint64_t> offsets = {0, 2, 5, 7};
  const auto lists = build_inverted_lists(assign, offsets, 3);
  EXPECT_EQ(std::vector<std::uint32_t>(lists.list(0).begin(), lists.list(0).end()),
            (std::vector<std::uint32_t>{0, 1, 2}));
  EXPECT_TRUE(lists.list(1).empty());
  EXPECT_TRUE(lists.list(2).empty());
}

TEST(BuildInvertedLists, Deduplicates) {
  const std::vector<std::uint32_t> assign = {3, 3, 1};
  const std::vector<std::uint64_t> offsets = {0, 2, 3};
  const auto lists = build_inverted_lists(assign, offsets, 4);
  ASSERT_EQ(lists.list(3).size(), 1u);
  EXPECT_EQ(lists.list(3)[0], 0u);
  ASSERT_EQ(lists.list(1).size(), 1u);
  EXPECT_EQ(lists.list(1)[0], 1u);
}

TEST(BuildInvertedLists, MatchesBruteForceInAnyOrder) {
  std::mt19937_64 rng(28);
  const std::size_t passages = 40, k = 9;
  std::vector<std::uint64_t> offsets = {0};
  std::vector<std::uint32_t> assign;
  std::uniform_int_distribution<std::uint32_t> cid(0, k - 1);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  for (std::size_t p = 0; p < passages; ++p) {
    const auto n = len(rng);
    for (std::size_t t = 0; t < n; ++t) assign.push_back(cid(rng));
    offsets.push_back(assign.size());
  }
  // Oracle: visit passages in a shuffled order and insert into sets.
  std::vector<std::size_t> order(passages);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::set<std::uint32_t>> expected(k);
  for (const auto p : order) {
    for (std::size_t t = offsets[p]; t < offsets[p + 1]; ++t) expected[assign[t]].insert(p);
  }
  const auto lists = build_inverted_lists(assign, offsets, k);
  for (std::size_t c = 0; c < k; ++c) {
    EXPECT_EQ(std::vector<std::uint32_t>(lists.list(c).begin(), lists.list(c).end()),
              std::vector<std::uint32_t>(expected[c].begin(), expected[c].end()));
  }
}

double mean_reconstruction_error(std::span<const float> residuals, std::size_t dim,
                                 const PQCodebook& pq) {
  const std::size_t n = residuals.size() / dim;
  std::vector<std::uint8_t> codes(pq.m());
  std::vector<float> rec(dim);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = residuals.subspan(i * dim, dim);
    pq.encode(r, codes);
    pq.decode(codes, rec);
    for (std::size_t d = 0; d < dim; ++d) total += (r[d] - rec[d]) * (r[d] - rec[d]);
  }
  return total / static_cast<double>(n);
}

TEST(TrainPQ, ZeroResiduals) {
  const std::vector<float> zeros(300 * 8, 0.0f);
  const auto pq = train_pq(zeros, 8, 4, 1, 5);
  for (const float x : pq.codewords()) EXPECT_EQ(x, 0.0f);
  EXPECT_EQ(mean_reconstruction_error(zeros, 8, pq), 0.0);
}

TEST(TrainPQ, DistinctResidualsGetOwnCodewords) {
  std::mt19937_64 rng(31);
  std::normal_distribution<float> g(0.0f, 0.2f);
  std::vector<float> res(256 * 4);
  for (float& x : res) x = g(rng);
  const auto pq = train_pq(res, 4, 1, 2, 5);
  EXPECT_NEAR(mean_reconstruction_error(res, 4, pq), 0.0, 1e-12);
}

TEST(TrainPQ, BeatsUntrainedCodebook) {
  std::mt19937_64 rng(32);
  std::normal_distribution<float> g(0.0f, 0.1f);
  const std::size_t dim = 64;
  std::vector<float> res(10000 * dim);
  for (float& x : res) x = g(rng);
  const auto trained = train_pq(res, dim, 16, 3, 8);
  std::vector<float> random_cw(dim * kCodewordsPerSubspace);
  for (float& x : random_cw) x = g(rng);
  const PQCodebook untrained(dim, 16, random_cw);
  EXPECT_LE(mean_reconstruction_error(res, dim, trained),
            mean_reconstruction_error(res, dim, untrained));
}

TEST(TrainPQ, PadsSmallTrainingSets) {
  std::mt19937_64 rng(33);
  std::normal_distribution<float> g(0.0f, 0.1f);
  std::vector<float> res(10 * 8);
  for (float& x : res) x = g(rng);
  const auto pq = train_pq(res, 8, 2, 4, 3);
  EXPECT_NEAR(mean_reconstruction_error(res, 8, pq), 0.0, 1e-12);
}

TEST(TrainPQ, Errors) {
  EXPECT_THROW(train_pq(std::vector<float>(30, 0.0f), 10, 4, 0), Error);
  EXPECT_THROW(train_pq(std::vector<float>{}, 8, 4, 0), Error);
}

struct SmallBuild {
  TokenEmbeddingCollection coll;
  CentroidIndex ci;
  std::vector<std::uint32_t> assign;
  PQCodebook pq;
};

SmallBuild small_build(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SmallBuild b{testing::random_collection(rng, 80, 4, 10, 16), {}, {}, {}};
  b.ci = train_centroids(b.coll, 16, 5, seed);
  b.assign = assign_tokens(b.coll, b.ci);
  b.pq = train_pq(compute_residuals(b.coll, b.ci, b.assign), 16, 4, seed, 5);
  return b;
}

TEST(EncodeResiduals, TokenEqualToCentroidPicksCodewordsNearestZero) {
  auto b = small_build(41);
  // A passage whose single token is centroid 3.
  TokenEmbeddingCollection coll(16);
  coll.add_passage(b.ci.centroid(3));
  const std::vector<std::uint32_t> assign = {3};
  const auto codes = encode_residuals(coll, b.ci, assign, b.pq);
  for (std::size_t s = 0; s < 4; ++s) {
    double best = 1e30;
    for (std::size_t c = 0; c < kCodewordsPerSubspace; ++c) {
      best = std::min(best, testing::dot_double(b.pq.codeword(s, c), b.pq.codeword(s, c)));
    }
    const auto chosen = b.pq.codeword(s, codes[s]);
    EXPECT_NEAR(testing::dot_double(chosen, chosen), best, 1e-6);
  }
}

TEST(EncodeResiduals, LocallyOptimalInFirstSubspace) {
  auto b = small_build(42);
  const auto codes = encode_residuals(b.coll, b.ci, b.assign, b.pq);
  const auto residuals = compute_residuals(b.coll, b.ci, b.assign);
  const std::size_t m = b.pq.m();
  std::vector<float> rec(16);
  for (std::size_t t = 0; t < b.coll.total_tokens(); ++t) {
    std::vector<std::uint8_t> tuple(codes.begin() + t * m, codes.begin() + (t + 1) * m);
    const auto r = std::span<const float>(residuals).subspan(t * 16, 16);
    const auto err = [&] {
      b.pq.decode(tuple, rec);
      double e = 0.0;
      for (std::size_t d = 0; d < 16; ++d) e += (rec[d] - r[d]) * (rec[d] - r[d]);
      return e;
    };
    const double chosen = err();
    const std::uint8_t original = tuple[0];
    for (std::size_t c = 0; c < kCodewordsPerSubspace; ++c) {
      tuple[0] = static_cast<std::uint8_t>(c);
      EXPECT_LE(chosen, err() + 1e-6) << "token " << t << " code " << c;
    }
    tuple[0] = original;
  }
}

TEST(BuildIndex, ProducesConsistentIndex) {
  std::mt19937_64 rng(43);
  const auto coll = testing::random_collection(rng, 50, 3, 12, 32);
  BuildOptions opts;
  opts.num_centroids = 32;
  opts.m = 16;
  opts.iters = 4;
  opts.pq_iters = 4;
  opts.keep_exact_residuals = true;
  const auto index = build_index(coll, opts);
  EXPECT_NO_THROW(check_index(index));
  EXPECT_EQ(index.corpus.total_tokens(), coll.total_tokens());
  EXPECT_EQ(index.corpus.bytes_per_embedding(), 20u);
  // Inverted-list completeness straight from the definition.
  for (std::size_t p = 0; p < coll.num_passages(); ++p) {
    for (const auto c : index.corpus.passage_cids(p)) {
      const auto list = index.centroids.inverted_lists.list(c);
      EXPECT_TRUE(std::binary_search(list.begin(), list.end(), static_cast<std::uint32_t>(p)));
    }
  }
  // Exact residuals reconstruct the tokens.
  for (std::size_t t = 0; t < coll.total_tokens(); ++t) {
    const auto c = index.centroids.centroid(index.corpus.token_cids[t]);
    for (std::size_t d = 0; d < 32; ++d) {
      EXPECT_NEAR(c[d] + index.exact_residual(t)[d], coll.token(t)[d], 1e-6);
    }
  }

  opts.m = 5;
  EXPECT_THROW(build_index(coll, opts), Error);
}

}  // namespace
}  // namespace emvb
