#include "emvb/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "emvb/error.hpp"

namespace emvb {

float l2_norm(std::span<const float> v) noexcept { return std::sqrt(dot(v, v)); }

float dot(std::span<const float> a, std::span<const float> b) noexcept {
  float acc = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

TokenEmbeddingCollection::TokenEmbeddingCollection(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error("embedding dimension must be positive");
}

TokenEmbeddingCollection::TokenEmbeddingCollection(std::size_t dim, std::vector<float> data,
                                                   std::vector<std::uint64_t> offsets)
    : dim_(dim), data_(std::move(data)), offsets_(std::move(offsets)) {
  if (dim_ == 0) throw Error("embedding dimension must be positive");
  if (offsets_.empty() || offsets_.front() != 0) throw Error("passage offsets must start at 0");
  for (std::size_t p = 1; p < offsets_.size(); ++p) {
    if (offsets_[p] < offsets_[p - 1]) throw Error("passage offsets must be non-decreasing");
  }
  if (data_.size() != offsets_.back() * dim_) {
    throw Error("embedding data size does not match offsets and dimension");
  }
}

void TokenEmbeddingCollection::add_passage(std::span<const float> tokens) {
  if (tokens.size() % dim_ != 0) throw Error("passage size is not a multiple of the dimension");
  data_.insert(data_.end(), tokens.begin(), tokens.end());
  offsets_.push_back(offsets_.back() + tokens.size() / dim_);
}

namespace {

void check_norm(std::span<const float> v, std::size_t p, std::size_t t,
                std::vector<Violation>& out) {
  const float norm = l2_norm(v);
  if (!(std::fabs(norm - 1.0f) <= kNormTolerance)) {
    std::ostringstream os;
    os << "norm " << norm;
    out.push_back({ViolationKind::not_normalized, p, t, os.str()});
  }
}

}  // namespace

std::vector<Violation> validate_collection(const TokenEmbeddingCollection& coll) {
  std::vector<Violation> out;
  for (std::size_t p = 0; p < coll.num_passages(); ++p) {
    const std::size_t n = coll.passage_length(p);
    if (n == 0) {
      out.push_back({ViolationKind::empty_passage, p, 0, "passage has no tokens"});
      continue;
    }
    const std::size_t first = coll.offsets()[p];
    for (std::size_t t = 0; t < n; ++t) check_norm(coll.token(first + t), p, t, out);
  }
  return out;
}

std::vector<Violation> validate_collection(std::size_t dim, const RaggedPassages& passages) {
  std::vector<Violation> out;
  for (std::size_t p = 0; p < passages.size(); ++p) {
    if (passages[p].empty()) {
      out.push_back({ViolationKind::empty_passage, p, 0, "passage has no tokens"});
      continue;
    }
    for (std::size_t t = 0; t < passages[p].size(); ++t) {
      const auto& v = passages[p][t];
      if (v.size() != dim) {
        out.push_back({ViolationKind::dimension_mismatch, p, t,
                       "expected " + std::to_string(dim) + " components, got " +
                           std::to_string(v.size())});
        continue;
      }
      check_norm(v, p, t, out);
    }
  }
  return out;
}

std::string describe(const Violation& v) {
  std::ostringstream os;
  switch (v.kind) {
    case ViolationKind::dimension_mismatch: os << "dimension mismatch"; break;
    case ViolationKind::not_normalized: os << "not normalized"; break;
    case ViolationKind::empty_passage: os << "empty passage"; break;
  }
  os << " at passage " << v.passage;
  if (v.kind != ViolationKind::empty_passage) os << ", token " << v.token;
  if (!v.detail.empty()) os << " (" << v.detail << ")";
  return os.str();
}

TokenEmbeddingCollection make_collection(std::size_t dim, const RaggedPassages& passages) {
  const auto violations = validate_collection(dim, passages);
  if (!violations.empty()) {
    throw Error("invalid collection: " + describe(violations.front()) + " and " +
                std::to_string(violations.size() - 1) + " more");
  }
  TokenEmbeddingCollection coll(dim);
  std::vector<float> flat;
  for (const auto& passage : passages) {
    flat.clear();
    for (const auto& token : passage) flat.insert(flat.end(), token.begin(), token.end());
    coll.add_passage(flat);
  }
  return coll;
}

QueryMatrix::QueryMatrix(std::size_t dim) : dim_(dim), terms_(kQueryTerms * dim, 0.0f) {}

QueryMatrix QueryMatrix::from_rows(std::span<const float> rows, std::size_t dim) {
  if (dim == 0 || rows.size() % dim != 0) throw Error("query rows are not a multiple of dim");
  std::size_t n = rows.size() / dim;
  if (n > kQueryTerms) {
    spdlog::warn("query has {} terms, truncating to {}", n, kQueryTerms);
    n = kQueryTerms;
  }
  QueryMatrix q(dim);
  for (std::size_t i = 0; i < n; ++i) q.set_term(i, rows.subspan(i * dim, dim));
  return q;
}

void QueryMatrix::set_term(std::size_t i, std::span<const float> values) {
  if (i >= kQueryTerms) throw Error("query term index out of range");
  if (values.size() != dim_) throw Error("query term dimension mismatch");
  const float norm = l2_norm(values);
  const TermMask bit = TermMask{1} << i;
  if (norm == 0.0f) {
    std::fill_n(terms_.begin() + static_cast<std::ptrdiff_t>(i * dim_), dim_, 0.0f);
    active_mask_ &= ~bit;
    return;
  }
  if (!(std::fabs(norm - 1.0f) <= kNormTolerance)) {
    throw Error("query term " + std::to_string(i) + " is not unit length");
  }
  std::copy(values.begin(), values.end(), terms_.begin() + static_cast<std::ptrdiff_t>(i * dim_));
  active_mask_ |= bit;
}

std::size_t QueryMatrix::num_active() const noexcept {
  return static_cast<std::size_t>(std::popcount(active_mask_));
}

SearchConfig SearchConfig::for_k(std::size_t k) {
  SearchConfig cfg;
  cfg.k = k;
  cfg.ndocs = 4 * k;
  cfg.n_filter = std::max<std::size_t>(1000, cfg.ndocs);
  return cfg;
}

void SearchConfig::validate() const {
  if (nprobe < 1) throw Error("nprobe must be at least 1");
  if (k < 1) throw Error("k must be at least 1");
  if (!(k <= ndocs && ndocs <= n_filter)) {
    throw Error("search config requires k <= ndocs <= n_filter (k=" + std::to_string(k) +
                ", ndocs=" + std::to_string(ndocs) + ", n_filter=" + std::to_string(n_filter) +
                ")");
  }
}

}  // namespace emvb
