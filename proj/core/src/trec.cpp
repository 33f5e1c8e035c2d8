#include "emvb/trec.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "emvb/error.hpp"

namespace emvb {

void write_run(std::ostream& os, std::string_view qid, const std::vector<ScoredPassage>& hits,
               std::string_view tag) {
  for (std::size_t r = 0; r < hits.size(); ++r) {
    os << qid << "\tQ0\t" << hits[r].id << '\t' << (r + 1) << '\t' << hits[r].score << '\t' << tag
       << '\n';
  }
}

Run read_run(std::istream& is) {
  std::map<std::string, std::vector<std::pair<long, std::string>>> ranked;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string qid, ignored, pid;
    long rank = 0;
    if (!(fields >> qid >> ignored >> pid >> rank)) {
      throw Error("malformed run line " + std::to_string(line_no));
    }
    ranked[qid].emplace_back(rank, pid);
  }
  Run run;
  for (auto& [qid, entries] : ranked) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& pids = run[qid];
    for (auto& e : entries) pids.push_back(std::move(e.second));
  }
  return run;
}

Run read_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_run(in);
}

Qrels read_qrels(std::istream& is) {
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::vector<std::string> cols;
    for (std::string f; fields >> f;) cols.push_back(f);
    std::string qid, pid, grade;
    if (cols.size() == 3) {
      qid = cols[0], pid = cols[1], grade = cols[2];
    } else if (cols.size() == 4) {
      qid = cols[0], pid = cols[2], grade = cols[3];
    } else {
      throw Error("malformed qrels line " + std::to_string(line_no));
    }
    double g = 0.0;
    try {
      g = std::stod(grade);
    } catch (const std::exception&) {
      throw Error("malformed relevance grade on qrels line " + std::to_string(line_no));
    }
    auto& rel = qrels[qid];  // judged queries stay present even without positives
    if (g > 0.0) rel.insert(pid);
  }
  return qrels;
}

Qrels read_qrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_qrels(in);
}

}  // namespace emvb
