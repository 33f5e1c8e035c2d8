#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "emvb/trec.hpp"

namespace emvb {

// All metrics average over the queries of the run that have judgments;
// queries without qrels are skipped with a warning. An empty average is 0.

/// Mean reciprocal rank of the first relevant passage within the top k.
double mrr_at_k(const Run& run, const Qrels& qrels, std::size_t k);

/// Mean fraction of the relevant passages found within the top k.
double recall_at_k(const Run& run, const Qrels& qrels, std::size_t k);

/// Fraction of queries with at least one relevant passage within the top k.
double success_at_k(const Run& run, const Qrels& qrels, std::size_t k);

struct MetricSpec {
  enum class Kind { mrr, recall, success } kind;
  std::size_t k;
  std::string name;  // e.g. "mrr@10"
};

/// Parses "mrr@10,recall@100,success@5". Throws emvb::Error on bad input.
std::vector<MetricSpec> parse_metrics(std::string_view list);
double evaluate_metric(const MetricSpec& spec, const Run& run, const Qrels& qrels);

}  // namespace emvb
