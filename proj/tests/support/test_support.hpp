#pragma once

// Random generators and brute-force reference implementations shared by the
// unit and acceptance suites. Nothing here calls into the code paths it is
// used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "emvb/model.hpp"
#include "emvb/simd.hpp"

namespace emvb::testing {

/// Scalar plus whatever wider path this machine supports.
inline std::vector<simd::Isa> available_isas() {
  std::vector<simd::Isa> out = {simd::Isa::scalar};
  if (simd::detected_isa() != simd::Isa::scalar) out.push_back(simd::detected_isa());
  return out;
}

inline std::vector<float> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = gauss(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

inline TokenEmbeddingCollection random_collection(std::mt19937_64& rng, std::size_t passages,
                                                  std::size_t min_len, std::size_t max_len,
                                                  std::size_t dim) {
  TokenEmbeddingCollection coll(dim);
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::vector<float> buf;
  for (std::size_t p = 0; p < passages; ++p) {
    buf.clear();
    const std::size_t n = len(rng);
    for (std::size_t t = 0; t < n; ++t) {
      const auto v = random_unit(rng, dim);
      buf.insert(buf.end(), v.begin(), v.end());
    }
    coll.add_passage(buf);
  }
  return coll;
}

inline QueryMatrix random_query(std::mt19937_64& rng, std::size_t dim, std::size_t terms) {
  QueryMatrix q(dim);
  for (std::size_t i = 0; i < terms; ++i) q.set_term(i, random_unit(rng, dim));
  return q;
}

inline double dot_double(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

/// Sum over active query terms of the max dot product with any token.
inline double brute_force_maxsim(const QueryMatrix& q, const TokenEmbeddingCollection& coll,
                                 std::size_t passage) {
  double total = 0.0;
  const std::size_t first = coll.offsets()[passage];
  for (std::size_t i = 0; i < kQueryTerms; ++i) {
    if (!q.is_active(i)) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < coll.passage_length(passage); ++j) {
      best = std::max(best, dot_double(q.term(i), coll.token(first + j)));
    }
    total += best;
  }
  return total;
}

struct OracleHit {
  std::uint32_t id;
  double score;
};

/// Exhaustive ranking by maxsim, ties to the lower id.
inline std::vector<OracleHit> brute_force_ranking(const QueryMatrix& q,
                                                  const TokenEmbeddingCollection& coll,
                                                  std::size_t k) {
  std::vector<OracleHit> all;
  for (std::size_t p = 0; p < coll.num_passages(); ++p) {
    all.push_back({static_cast<std::uint32_t>(p), brute_force_maxsim(q, coll, p)});
  }
  std::sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
    return a.score > b.score || (a.score == b.score && a.id < b.id);
  });
  all.resize(std::min(k, all.size()));
  return all;
}

/// Linear scan reference for threshold selection.
inline std::vector<std::uint32_t> scan_above(std::span<const float> row, float th) {
  std::vector<std::uint32_t> out;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] > th) out.push_back(static_cast<std::uint32_t>(j));
  }
  return out;
}

/// Full descending sort with index tie-break, truncated to k.
inline std::vector<std::uint32_t> full_sort_top(std::span<const float> row, std::size_t k) {
  std::vector<std::uint32_t> idx(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) idx[j] = static_cast<std::uint32_t>(j);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return row[a] > row[b]; });
  idx.resize(std::min(k, idx.size()));
  return idx;
}

/// Count of terms i with some token centroid in close[i], straight from the
/// set definition.
inline std::uint32_t count_terms_with_close_token(
    std::span<const std::uint32_t> cids, const std::vector<std::vector<std::uint32_t>>& close) {
  std::uint32_t count = 0;
  for (const auto& set : close) {
    bool hit = false;
    for (const auto c : cids) {
      for (const auto s : set) hit = hit || (s == c);
    }
    count += hit ? 1u : 0u;
  }
  return count;
}

/// Sum over active terms of the max over tokens of cs[i][cid], in double.
inline double naive_centroid_score(std::span<const std::uint32_t> cids, const ScoreMatrix& cs,
                                   TermMask mask) {
  double total = 0.0;
  for (std::size_t i = 0; i < cs.rows; ++i) {
    if (((mask >> i) & 1u) == 0) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto c : cids) best = std::max(best, static_cast<double>(cs.at(i, c)));
    total += best;
  }
  return total;
}

/// |a - b| <= rel * max(|a|, |b|), with a 1e-6 absolute floor for values
/// near zero.
inline bool relative_close(double a, double b, double rel) {
  return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b)) + 1e-6;
}

}  // namespace emvb::testing
