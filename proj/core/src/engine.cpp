#include "emvb/engine.hpp"

#include <algorithm>
#include <chrono>

#include <Eigen/Core>
#include <spdlog/spdlog.h>

#include "emvb/centroid_interaction.hpp"
#include "emvb/error.hpp"

namespace emvb {
namespace {

using Clock = std::chrono::steady_clock;
using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double elapsed_ms(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration<double, std::milli>(to - from).count();
}

}  // namespace

SearchEngine::SearchEngine(const Index& index, ResidualMode mode, SelectVariant variant)
    : index_(index), mode_(mode), variant_(variant) {
  if (mode_ == ResidualMode::exact && !index_.has_exact_residuals()) {
    throw Error("exact residual mode needs an index built with exact residuals");
  }
}

ScoreScratch SearchEngine::make_scratch() const {
  ScoreScratch s;
  const std::size_t nc = index_.centroids.num_centroids();
  s.cs = ScoreMatrix(kQueryTerms, nc);
  s.cs_t = ScoreMatrix(nc, kQueryTerms);
  s.survivors.assign(kQueryTerms, std::vector<std::uint32_t>(nc));
  s.bitvectors.reset(nc);
  s.tilde_offsets.assign(index_.corpus.num_passages(), 0);
  return s;
}

void SearchEngine::compute_centroid_scores(const QueryMatrix& q, ScoreMatrix& cs) const {
  const auto nc = static_cast<Eigen::Index>(index_.centroids.num_centroids());
  const auto d = static_cast<Eigen::Index>(index_.dim());
  cs.resize(kQueryTerms, static_cast<std::size_t>(nc));
  const Eigen::Map<const RowMatrix> qm(q.terms().data(), static_cast<Eigen::Index>(kQueryTerms), d);
  const Eigen::Map<const RowMatrix> cm(index_.centroids.centroids.data(), nc, d);
  Eigen::Map<RowMatrix>(cs.values.data(), static_cast<Eigen::Index>(kQueryTerms), nc).noalias() =
      qm * cm.transpose();
}

SearchResult SearchEngine::search(const QueryMatrix& q, const SearchConfig& cfg_in,
                                  ScoreScratch& s) const {
  if (q.dim() != index_.dim()) throw Error("query dimension differs from the index");
  if (q.num_active() == 0) throw Error("query has no active terms");
  cfg_in.validate();

  const auto& corpus = index_.corpus;
  const auto& lists = index_.centroids.inverted_lists;
  const std::size_t num_passages = corpus.num_passages();
  const std::size_t nc = index_.centroids.num_centroids();
  const TermMask mask = q.active_mask();

  SearchConfig cfg = cfg_in;
  if (cfg.k > num_passages) {
    spdlog::warn("k={} exceeds the corpus size {}, clamping", cfg.k, num_passages);
    cfg.k = num_passages;
  }
  cfg.ndocs = std::min(cfg.ndocs, num_passages);
  cfg.n_filter = std::min(cfg.n_filter, num_passages);
  cfg.nprobe = std::min(cfg.nprobe, nc);
  if (s.survivors.size() != kQueryTerms || s.tilde_offsets.size() != num_passages) {
    s = make_scratch();
  }

  SearchResult result;
  const auto t0 = Clock::now();

  // Retrieval: centroid scores, close sets, probed centroids, candidate union.
  compute_centroid_scores(q, s.cs);
  s.candidates.clear();
  for (std::size_t i = 0; i < kQueryTerms; ++i) {
    auto& surv = s.survivors[i];
    if (!q.is_active(i)) {
      surv.clear();
      continue;
    }
    surv.resize(nc);
    surv.resize(select_above_threshold(s.cs.row(i), cfg.th, variant_, surv));
    top_nprobe_from_survivors(s.cs.row(i), surv, cfg.nprobe, s.probe);
    result.stats.probed_centroids += s.probe.size();
    for (const auto c : s.probe) {
      const auto list = lists.list(c);
      s.candidates.insert(s.candidates.end(), list.begin(), list.end());
    }
  }
  std::sort(s.candidates.begin(), s.candidates.end());
  s.candidates.erase(std::unique(s.candidates.begin(), s.candidates.end()), s.candidates.end());
  result.stats.candidates = s.candidates.size();
  const auto t1 = Clock::now();

  // Pre-filter on stacked bit vectors.
  s.bitvectors.reset(nc);
  build_stacked_bitvectors(s.survivors, mask, s.bitvectors);
  select_candidates(s.candidates, s.bitvectors, corpus, cfg.n_filter, s.prefilter_scores,
                    s.filtered);
  result.stats.filtered = s.filtered.size();
  const auto t2 = Clock::now();

  // Centroid interaction on the survivors; keeps each gathered block.
  transpose_scores(s.cs, s.cs_t);
  std::size_t arena = 0;
  for (const auto p : s.filtered) arena += corpus.passage_length(p) * kQueryTerms;
  s.tilde.resize(arena);
  s.scored.clear();
  std::size_t offset = 0;
  for (const auto p : s.filtered) {
    const auto cids = corpus.passage_cids(p);
    s.tilde_offsets[p] = offset;
    const float score = centroid_score(
        cids, s.cs_t, mask, std::span<float>(s.tilde.data() + offset, cids.size() * kQueryTerms));
    offset += cids.size() * kQueryTerms;
    s.scored.push_back({p, score});
  }
  auto top_docs = select_ndocs(std::move(s.scored), cfg.ndocs);
  const auto t3 = Clock::now();

  // Late interaction with centroid scores reused from the cached blocks.
  if (mode_ == ResidualMode::pq) build_adc_tables(q, corpus.pq, s.adc);
  std::vector<ScoredPassage> late;
  late.reserve(top_docs.size());
  for (const auto& doc : top_docs) {
    const std::size_t n = corpus.passage_length(doc.id);
    const std::span<const float> tilde(s.tilde.data() + s.tilde_offsets[doc.id], n * kQueryTerms);
    const float score =
        mode_ == ResidualMode::pq
            ? late_score(doc.id, tilde, s.adc, corpus, cfg.th_r, mask, &result.stats.late)
            : late_score_exact(doc.id, tilde, q, index_.exact_residuals, corpus, cfg.th_r,
                               &result.stats.late);
    late.push_back({doc.id, score});
  }
  result.stats.late_scored = late.size();
  result.hits = final_topk(std::move(late), cfg.k);
  const auto t4 = Clock::now();

  s.scored = std::move(top_docs);  // hand the buffer back for reuse
  result.timings.retrieval_ms = elapsed_ms(t0, t1);
  result.timings.prefilter_ms = elapsed_ms(t1, t2);
  result.timings.centroid_interaction_ms = elapsed_ms(t2, t3);
  result.timings.late_interaction_ms = elapsed_ms(t3, t4);
  result.timings.total_ms = elapsed_ms(t0, t4);
  return result;
}

SearchResult SearchEngine::search(const QueryMatrix& q, const SearchConfig& cfg) const {
  auto scratch = make_scratch();
  return search(q, cfg, scratch);
}

}  // namespace emvb
