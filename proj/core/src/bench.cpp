#include "emvb/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "emvb/error.hpp"
#include "emvb/prefilter.hpp"

namespace emvb::bench {
namespace {

using Clock = std::chrono::steady_clock;

template <class Fn>
double time_ns(Fn&& fn) {
  const auto t0 = Clock::now();
  fn();
  return std::chrono::duration<double, std::nano>(Clock::now() - t0).count();
}

volatile std::size_t g_sink = 0;

}  // namespace

std::vector<float> parse_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) {
    try {
      parts.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error("bad grid '" + spec + "', expected lo:hi:step");
    }
  }
  if (parts.size() == 1) return {static_cast<float>(parts[0])};
  if (parts.size() != 3 || parts[2] <= 0.0 || parts[1] < parts[0]) {
    throw Error("bad grid '" + spec + "', expected lo:hi:step");
  }
  std::vector<float> grid;
  const auto steps = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) {
    const double v = parts[0] + static_cast<double>(i) * parts[2];
    grid.push_back(static_cast<float>(std::round(v * 1e6) / 1e6));
  }
  return grid;
}

std::vector<SelectBenchRow> bench_select(std::size_t len, std::span<const float> thresholds,
                                         std::span<const SelectVariant> variants,
                                         std::size_t reps, std::uint64_t seed) {
  if (len == 0 || reps == 0) throw Error("bench_select needs len > 0 and reps > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> score(-1.0f, 1.0f);
  std::vector<float> row(len);
  for (float& x : row) x = score(rng);
  std::vector<std::uint32_t> out(len);

  // Repeat short rows so each timing covers at least ~4M elements.
  const std::size_t inner = std::max<std::size_t>(1, (std::size_t{1} << 22) / len);

  std::vector<SelectBenchRow> rows;
  for (const float th : thresholds) {
    for (const auto v : variants) {
      rows.push_back({v, th, std::numeric_limits<double>::infinity(), 0.0});
    }
  }
  for (std::size_t rep = 0; rep < reps; ++rep) {
    std::size_t r = 0;
    for (const float th : thresholds) {
      for (const auto v : variants) {
        std::size_t selected = 0;
        const double ns = time_ns([&] {
          for (std::size_t it = 0; it < inner; ++it) {
            selected = select_above_threshold(row, th, v, out);
            g_sink = g_sink + out[selected == 0 ? 0 : selected - 1];
          }
        });
        auto& entry = rows[r++];
        entry.ns_per_element =
            std::min(entry.ns_per_element, ns / static_cast<double>(inner * len));
        entry.selectivity = static_cast<double>(selected) / static_cast<double>(len);
      }
    }
  }
  return rows;
}

void write_select_csv(std::ostream& os, const std::vector<SelectBenchRow>& rows) {
  os << "variant,th,ns_per_element,selectivity\n";
  for (const auto& r : rows) {
    os << to_string(r.variant) << ',' << r.th << ',' << r.ns_per_element << ',' << r.selectivity
       << '\n';
  }
}

MembershipBenchResult bench_membership(std::size_t num_centroids, std::size_t passages,
                                       std::size_t tokens_per_passage, double density,
                                       std::size_t reps, std::uint64_t seed) {
  if (num_centroids == 0 || passages == 0 || tokens_per_passage == 0 || reps == 0) {
    throw Error("bench_membership needs positive sizes");
  }
  std::mt19937_64 rng(seed);
  StackedBitVectors stacked(num_centroids);
  PerTermBitVectors per_term(num_centroids);
  std::bernoulli_distribution bit(density);
  std::vector<std::uint32_t> close;
  for (std::size_t i = 0; i < kQueryTerms; ++i) {
    close.clear();
    for (std::size_t c = 0; c < num_centroids; ++c) {
      if (bit(rng)) close.push_back(static_cast<std::uint32_t>(c));
    }
    stacked.add_term(i, close);
    per_term.add_term(i, close);
  }
  std::uniform_int_distribution<std::uint32_t> cid(0, static_cast<std::uint32_t>(num_centroids - 1));
  std::vector<std::uint32_t> tokens(passages * tokens_per_passage);
  for (auto& t : tokens) t = cid(rng);

  MembershipBenchResult result{std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity()};
  for (std::size_t rep = 0; rep < reps; ++rep) {
    std::size_t sum_stacked = 0;
    std::size_t sum_per_term = 0;
    const double a = time_ns([&] {
      for (std::size_t p = 0; p < passages; ++p) {
        sum_stacked += prefilter_score(
            std::span<const std::uint32_t>(tokens).subspan(p * tokens_per_passage, tokens_per_passage),
            stacked);
      }
    });
    const double b = time_ns([&] {
      for (std::size_t p = 0; p < passages; ++p) {
        sum_per_term += prefilter_score_per_term(
            std::span<const std::uint32_t>(tokens).subspan(p * tokens_per_passage, tokens_per_passage),
            per_term);
      }
    });
    if (sum_stacked != sum_per_term) throw Error("membership layouts disagree");
    g_sink = g_sink + sum_stacked;
    result.stacked_ns_per_passage = std::min(result.stacked_ns_per_passage, a / passages);
    result.per_term_ns_per_passage = std::min(result.per_term_ns_per_passage, b / passages);
  }
  return result;
}

LatencySummary summarize(std::vector<double> samples) {
  LatencySummary s;
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  double sum = 0.0;
  for (const double v : samples) sum += v;
  s.mean = sum / static_cast<double>(samples.size());
  const auto rank = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
    return samples[std::clamp<std::size_t>(idx, 1, samples.size()) - 1];
  };
  s.p50 = rank(0.50);
  s.p99 = rank(0.99);
  return s;
}

std::vector<E2ERow> bench_e2e(const SearchEngine& engine, std::span<const QueryMatrix> queries,
                              std::span<const SearchConfig> configs) {
  auto scratch = engine.make_scratch();
  std::vector<E2ERow> rows;
  for (const auto& cfg : configs) {
    for (std::size_t q = 0; q < std::min<std::size_t>(queries.size(), 10); ++q) {
      engine.search(queries[q], cfg, scratch);
    }
    std::vector<double> retrieval, prefilter, ci, li, total;
    LateInteractionStats late;
    for (const auto& query : queries) {
      const auto r = engine.search(query, cfg, scratch);
      retrieval.push_back(r.timings.retrieval_ms);
      prefilter.push_back(r.timings.prefilter_ms);
      ci.push_back(r.timings.centroid_interaction_ms);
      li.push_back(r.timings.late_interaction_ms);
      total.push_back(r.timings.total_ms);
      late += r.stats.late;
    }
    E2ERow row;
    row.config = cfg;
    row.queries = queries.size();
    row.retrieval = summarize(std::move(retrieval));
    row.prefilter = summarize(std::move(prefilter));
    row.centroid_interaction = summarize(std::move(ci));
    row.late_interaction = summarize(std::move(li));
    row.total = summarize(std::move(total));
    row.work_ratio = late.work_ratio();
    rows.push_back(row);
  }
  return rows;
}

void write_e2e_csv(std::ostream& os, const std::vector<E2ERow>& rows) {
  os << "nprobe,th,n_filter,ndocs,th_r,k,queries";
  for (const char* phase : {"retrieval", "prefilter", "centroid_interaction", "late_interaction", "total"}) {
    os << ',' << phase << "_mean_ms," << phase << "_p50_ms," << phase << "_p99_ms";
  }
  os << ",work_ratio\n";
  for (const auto& r : rows) {
    const auto& c = r.config;
    os << c.nprobe << ',' << c.th << ',' << c.n_filter << ',' << c.ndocs << ',' << c.th_r << ','
       << c.k << ',' << r.queries;
    for (const auto* s : {&r.retrieval, &r.prefilter, &r.centroid_interaction, &r.late_interaction, &r.total}) {
      os << ',' << s->mean << ',' << s->p50 << ',' << s->p99;
    }
    os << ',' << r.work_ratio << '\n';
  }
}

}  // namespace emvb::bench
