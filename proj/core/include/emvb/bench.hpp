#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "emvb/engine.hpp"
#include "emvb/threshold_select.hpp"

namespace emvb::bench {

struct SelectBenchRow {
  SelectVariant variant;
  float th;
  double ns_per_element;  // best of reps
  double selectivity;     // fraction of the row selected
};

/// Times every variant on one random row with scores uniform in [-1, 1].
std::vector<SelectBenchRow> bench_select(std::size_t len, std::span<const float> thresholds,
                                         std::span<const SelectVariant> variants,
                                         std::size_t reps, std::uint64_t seed);

void write_select_csv(std::ostream& os, const std::vector<SelectBenchRow>& rows);

/// Parses "lo:hi:step" into an inclusive grid.
std::vector<float> parse_grid(const std::string& spec);

struct MembershipBenchResult {
  double stacked_ns_per_passage;
  double per_term_ns_per_passage;
  double speedup() const noexcept { return per_term_ns_per_passage / stacked_ns_per_passage; }
};

/// Stacked bit vectors against one bit vector per term. Each (term,
/// centroid) bit is set with probability density.
MembershipBenchResult bench_membership(std::size_t num_centroids, std::size_t passages,
                                       std::size_t tokens_per_passage, double density,
                                       std::size_t reps, std::uint64_t seed);

struct LatencySummary {
  double mean = 0.0;
  double p50 = 0.0;
  double p99 = 0.0;
};

LatencySummary summarize(std::vector<double> samples);

struct E2ERow {
  SearchConfig config;
  std::size_t queries = 0;
  LatencySummary retrieval, prefilter, centroid_interaction, late_interaction, total;
  double work_ratio = 0.0;
};

/// Runs every query under each config, after one warm-up pass.
std::vector<E2ERow> bench_e2e(const SearchEngine& engine, std::span<const QueryMatrix> queries,
                              std::span<const SearchConfig> configs);

void write_e2e_csv(std::ostream& os, const std::vector<E2ERow>& rows);

}  // namespace emvb::bench
