#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "emvb/bench.hpp"
#include "emvb/error.hpp"
#include "emvb/index_builder.hpp"
#include "support/test_support.hpp"

namespace emvb {
namespace {

TEST(Summarize, MeanAndPercentiles) {
  std::vector<double> samples;
  for (int i = 1; i <= 100; ++i) samples.push_back(static_cast<double>(i));
  const auto s = bench::summarize(samples);
  EXPECT_DOUBLE_EQ(s.mean, 50.5);
  EXPECT_NEAR(s.p50, 50.5, 0.5);
  EXPECT_NEAR(s.p99, 99.0, 1.0);
  EXPECT_LE(s.p50, s.p99);
}

TEST(ParseGrid, Inclusive) {
  const auto grid = bench::parse_grid("0.1:0.7:0.1");
  ASSERT_EQ(grid.size(), 7u);
  EXPECT_FLOAT_EQ(grid.front(), 0.1f);
  EXPECT_FLOAT_EQ(grid.back(), 0.7f);
  EXPECT_THROW(bench::parse_grid("0.1:0.7"), Error);
  EXPECT_THROW(bench::parse_grid("0.1:0.7:0"), Error);
}

TEST(BenchSelect, OneRowPerVariantAndThreshold) {
  const std::vector<float> th = {0.2f, 0.6f};
  const std::vector<SelectVariant> variants(kAllSelectVariants.begin(), kAllSelectVariants.end());
  const auto rows = bench::bench_select(4096, th, variants, 1, 1);
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& r : rows) {
    EXPECT_GT(r.ns_per_element, 0.0);
    EXPECT_NEAR(r.selectivity, (1.0 - r.th) / 2.0, 0.05);
  }
  std::ostringstream csv;
  bench::write_select_csv(csv, rows);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "variant,th,ns_per_element,selectivity");
}

TEST(BenchE2E, PhaseStatisticsPerConfig) {
  std::mt19937_64 rng(121);
  const auto coll = testing::random_collection(rng, 300, 4, 12, 16);
  BuildOptions opts;
  opts.num_centroids = 32;
  opts.m = 4;
  opts.iters = 3;
  opts.pq_iters = 3;
  const auto index = build_index(coll, opts);
  const SearchEngine engine(index);
  std::vector<QueryMatrix> queries;
  for (int q = 0; q < 100; ++q) queries.push_back(testing::random_query(rng, 16, 8));
  const std::vector<SearchConfig> configs = {SearchConfig::for_k(10), SearchConfig::for_k(20)};
  const auto rows = bench::bench_e2e(engine, queries, configs);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.queries, 100u);
    for (const auto& s : {r.retrieval, r.prefilter, r.centroid_interaction, r.late_interaction, r.total}) {
      EXPECT_GE(s.mean, 0.0);
      EXPECT_LE(s.p50, s.p99);
    }
    EXPECT_GT(r.work_ratio, 0.0);
    EXPECT_LE(r.work_ratio, 1.0);
  }
  std::ostringstream csv;
  bench::write_e2e_csv(csv, rows);
  std::size_t lines = 0;
  for (const char c : csv.str()) lines += c == '\n';
  EXPECT_EQ(lines, 3u);
  EXPECT_NE(csv.str().find("total_p99_ms"), std::string::npos);
}

TEST(BenchMembership, StackedIsFaster) {
  const auto r = bench::bench_membership(std::size_t{1} << 14, 200, 32, 0.01, 2, 3);
  EXPECT_GT(r.speedup(), 1.0);
}

}  // namespace
}  // namespace emvb
