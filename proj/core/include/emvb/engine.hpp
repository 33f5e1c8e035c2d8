#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "emvb/index_io.hpp"
#include "emvb/late_interaction.hpp"
#include "emvb/model.hpp"
#include "emvb/prefilter.hpp"
#include "emvb/threshold_select.hpp"

namespace emvb {

/// Wall-clock milliseconds spent in each phase of one query.
struct PhaseTimings {
  double retrieval_ms = 0.0;             // CS = q C^T, close sets, top-nprobe, candidate union
  double prefilter_ms = 0.0;             // stacked bit vectors and candidate selection
  double centroid_interaction_ms = 0.0;  // approximate scores and top-ndocs
  double late_interaction_ms = 0.0;      // ADC tables, filtered late interaction, top-k
  double total_ms = 0.0;

  double phase_sum() const noexcept {
    return retrieval_ms + prefilter_ms + centroid_interaction_ms + late_interaction_ms;
  }
};

struct SearchStats {
  std::size_t probed_centroids = 0;
  std::size_t candidates = 0;
  std::size_t filtered = 0;
  std::size_t late_scored = 0;
  LateInteractionStats late;
};

struct SearchResult {
  std::vector<ScoredPassage> hits;
  PhaseTimings timings;
  SearchStats stats;
};

enum class ResidualMode { pq, exact };

/// Per-query buffers. Owned by one query at a time; reused across queries.
struct ScoreScratch {
  ScoreMatrix cs;
  ScoreMatrix cs_t;
  std::vector<std::vector<std::uint32_t>> survivors;
  std::vector<std::uint32_t> probe;
  std::vector<std::uint32_t> candidates;
  StackedBitVectors bitvectors;
  std::vector<std::uint32_t> prefilter_scores;
  std::vector<std::uint32_t> filtered;
  std::vector<float> tilde;                 // arena of gathered centroid score blocks
  std::vector<std::size_t> tilde_offsets;   // per filtered candidate
  std::vector<ScoredPassage> scored;
  ADCTables adc;
};

/// Four-phase retrieval over an immutable Index. The engine keeps a
/// reference to the index, which must outlive it. search() is const and
/// safe to call concurrently with distinct scratch objects.
class SearchEngine {
 public:
  explicit SearchEngine(const Index& index, ResidualMode mode = ResidualMode::pq,
                        SelectVariant variant = SelectVariant::vectorized_if);

  ScoreScratch make_scratch() const;

  /// Throws on zero active terms, a dimension mismatch or an invalid config.
  /// k (and ndocs / n_filter with it) is clamped to the corpus size with a
  /// warning.
  SearchResult search(const QueryMatrix& q, const SearchConfig& cfg, ScoreScratch& scratch) const;
  SearchResult search(const QueryMatrix& q, const SearchConfig& cfg) const;

  const Index& index() const noexcept { return index_; }
  ResidualMode residual_mode() const noexcept { return mode_; }

 private:
  void compute_centroid_scores(const QueryMatrix& q, ScoreMatrix& cs) const;

  const Index& index_;
  ResidualMode mode_;
  SelectVariant variant_;
};

}  // namespace emvb
