#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "emvb/centroid_interaction.hpp"
#include "emvb/late_interaction.hpp"
#include "emvb/prefilter.hpp"
#include "emvb/threshold_select.hpp"

namespace {

using namespace emvb;

std::vector<float> uniform_row(std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> row(len);
  for (float& x : row) x = u(rng);
  return row;
}

// args: variant, th * 10
void BM_Select(benchmark::State& state) {
  const auto variant = kAllSelectVariants[static_cast<std::size_t>(state.range(0))];
  const float th = static_cast<float>(state.range(1)) / 10.0f;
  const auto row = uniform_row(std::size_t{1} << 18, 1);
  std::vector<std::uint32_t> out(row.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_above_threshold(row, th, variant, out));
    benchmark::ClobberMemory();
  }
  state.SetLabel(std::string(to_string(variant)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * row.size()));
}
BENCHMARK(BM_Select)->ArgsProduct({{0, 1, 2, 3}, {1, 3, 5, 7}});

struct MembershipFixture {
  std::vector<std::vector<std::uint32_t>> close;
  std::vector<std::uint32_t> cids;
  std::size_t num_centroids;

  explicit MembershipFixture(std::size_t nc) : close(kQueryTerms), num_centroids(nc) {
    std::mt19937_64 rng(2);
    std::bernoulli_distribution bit(0.01);
    for (auto& set : close) {
      for (std::uint32_t c = 0; c < nc; ++c) {
        if (bit(rng)) set.push_back(c);
      }
    }
    cids.resize(64 * 1000);
    for (auto& c : cids) c = static_cast<std::uint32_t>(rng() % nc);
  }
};

void BM_MembershipStacked(benchmark::State& state) {
  const MembershipFixture f(static_cast<std::size_t>(state.range(0)));
  StackedBitVectors bv(f.num_centroids);
  for (std::size_t i = 0; i < kQueryTerms; ++i) bv.add_term(i, f.close[i]);
  for (auto _ : state) {
    std::uint32_t sum = 0;
    for (std::size_t p = 0; p < 1000; ++p) {
      sum += prefilter_score(std::span<const std::uint32_t>(f.cids).subspan(p * 64, 64), bv);
    }
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 1000));
}
BENCHMARK(BM_MembershipStacked)->Arg(1 << 14)->Arg(1 << 18);

void BM_MembershipPerTerm(benchmark::State& state) {
  const MembershipFixture f(static_cast<std::size_t>(state.range(0)));
  PerTermBitVectors bv(f.num_centroids);
  for (std::size_t i = 0; i < kQueryTerms; ++i) bv.add_term(i, f.close[i]);
  for (auto _ : state) {
    std::uint32_t sum = 0;
    for (std::size_t p = 0; p < 1000; ++p) {
      sum += prefilter_score_per_term(std::span<const std::uint32_t>(f.cids).subspan(p * 64, 64), bv);
    }
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 1000));
}
BENCHMARK(BM_MembershipPerTerm)->Arg(1 << 14)->Arg(1 << 18);

struct CentroidFixture {
  ScoreMatrix cs, cs_t;
  std::vector<std::uint32_t> cids;

  CentroidFixture() : cs(kQueryTerms, std::size_t{1} << 16) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    for (float& x : cs.values) x = u(rng);
    cs_t = transpose_scores(cs);
    cids.resize(64 * 1000);
    for (auto& c : cids) c = static_cast<std::uint32_t>(rng() % cs.cols);
  }
};

void BM_CentroidScoreTransposed(benchmark::State& state) {
  const CentroidFixture f;
  std::vector<float> tilde(64 * kQueryTerms);
  for (auto _ : state) {
    float sum = 0.0f;
    for (std::size_t p = 0; p < 1000; ++p) {
      sum += centroid_score(std::span<const std::uint32_t>(f.cids).subspan(p * 64, 64), f.cs_t,
                            ~TermMask{0}, tilde);
    }
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 1000));
}
BENCHMARK(BM_CentroidScoreTransposed);

void BM_CentroidScoreUntransposed(benchmark::State& state) {
  const CentroidFixture f;
  for (auto _ : state) {
    float sum = 0.0f;
    for (std::size_t p = 0; p < 1000; ++p) {
      sum += centroid_score_untransposed(std::span<const std::uint32_t>(f.cids).subspan(p * 64, 64),
                                         f.cs, ~TermMask{0});
    }
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 1000));
}
BENCHMARK(BM_CentroidScoreUntransposed);

// args: m
void BM_AdcLookup(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::vector<float> table(m * kCodewordsPerSubspace);
  for (float& x : table) x = std::uniform_real_distribution<float>(-0.1f, 0.1f)(rng);
  std::vector<std::uint8_t> codes(m * 4096);
  for (auto& c : codes) c = static_cast<std::uint8_t>(rng() % 256);
  for (auto _ : state) {
    float sum = 0.0f;
    for (std::size_t t = 0; t < 4096; ++t) {
      sum += adc_lookup(table, std::span<const std::uint8_t>(codes).subspan(t * m, m));
    }
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 4096));
}
BENCHMARK(BM_AdcLookup)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
