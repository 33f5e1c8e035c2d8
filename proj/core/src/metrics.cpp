#include "emvb/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <spdlog/spdlog.h>

#include "emvb/error.hpp"

namespace emvb {
namespace {

// Averages per_query over the judged queries of the run.
template <class PerQuery>
double average(const Run& run, const Qrels& qrels, PerQuery&& per_query) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [qid, pids] : run) {
    const auto it = qrels.find(qid);
    if (it == qrels.end()) {
      spdlog::warn("query {} has no relevance judgments, skipped", qid);
      continue;
    }
    sum += per_query(pids, it->second);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::size_t cutoff(const std::vector<std::string>& pids, std::size_t k) {
  return std::min(k, pids.size());
}

}  // namespace

double mrr_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
  return average(run, qrels, [k](const auto& pids, const auto& relevant) {
    for (std::size_t r = 0; r < cutoff(pids, k); ++r) {
      if (relevant.contains(pids[r])) return 1.0 / static_cast<double>(r + 1);
    }
    return 0.0;
  });
}

double recall_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
  return average(run, qrels, [k](const auto& pids, const auto& relevant) {
    if (relevant.empty()) return 0.0;
    std::set<std::string_view> found;
    for (std::size_t r = 0; r < cutoff(pids, k); ++r) {
      if (relevant.contains(pids[r])) found.insert(pids[r]);
    }
    return static_cast<double>(found.size()) / static_cast<double>(relevant.size());
  });
}

double success_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
  return average(run, qrels, [k](const auto& pids, const auto& relevant) {
    for (std::size_t r = 0; r < cutoff(pids, k); ++r) {
      if (relevant.contains(pids[r])) return 1.0;
    }
    return 0.0;
  });
}

std::vector<MetricSpec> parse_metrics(std::string_view list) {
  std::vector<MetricSpec> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const std::string_view item = list.substr(0, comma);
    list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
    if (item.empty()) continue;
    const auto at = item.find('@');
    if (at == std::string_view::npos) throw Error("metric needs a cutoff: " + std::string(item));
    const auto name = item.substr(0, at);
    const auto digits = item.substr(at + 1);
    std::size_t k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || k == 0) {
      throw Error("bad metric cutoff: " + std::string(item));
    }
    MetricSpec spec{MetricSpec::Kind::mrr, k, std::string(item)};
    if (name == "mrr") {
      spec.kind = MetricSpec::Kind::mrr;
    } else if (name == "recall") {
      spec.kind = MetricSpec::Kind::recall;
    } else if (name == "success") {
      spec.kind = MetricSpec::Kind::success;
    } else {
      throw Error("unknown metric: " + std::string(name));
    }
    out.push_back(std::move(spec));
  }
  if (out.empty()) throw Error("no metrics requested");
  return out;
}

double evaluate_metric(const MetricSpec& spec, const Run& run, const Qrels& qrels) {
  switch (spec.kind) {
    case MetricSpec::Kind::mrr: return mrr_at_k(run, qrels, spec.k);
    case MetricSpec::Kind::recall: return recall_at_k(run, qrels, spec.k);
    case MetricSpec::Kind::success: return success_at_k(run, qrels, spec.k);
  }
  return 0.0;
}

}  // namespace emvb
