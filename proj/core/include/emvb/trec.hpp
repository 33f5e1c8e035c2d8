#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "emvb/model.hpp"

namespace emvb {

/// qid -> passage ids in rank order.
using Run = std::map<std::string, std::vector<std::string>>;
/// qid -> relevant passage ids (grade > 0).
using Qrels = std::map<std::string, std::set<std::string>>;

/// One line per hit: qid, Q0, pid, rank (1-based), score, tag; tab separated.
void write_run(std::ostream& os, std::string_view qid, const std::vector<ScoredPassage>& hits,
               std::string_view tag);

/// Reads whitespace-separated TREC run lines and orders each query by rank.
Run read_run(std::istream& is);
Run read_run(const std::filesystem::path& path);

/// Reads `qid \t pid \t grade` lines; the four-column TREC form
/// `qid 0 pid grade` is accepted too.
Qrels read_qrels(std::istream& is);
Qrels read_qrels(const std::filesystem::path& path);

}  // namespace emvb
