#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "emvb/model.hpp"

namespace emvb {

/// Planted-relevance corpus. Tokens are noisy copies of words drawn from a
/// Zipf-distributed vocabulary of random unit vectors. Each query picks a
/// target passage, copies up to target_terms of its tokens with extra noise
/// and fills the rest with common words; the target is the single relevant
/// passage.
struct SyntheticOptions {
  std::size_t passages = 1000;
  /// Passage lengths are uniform in [ceil(L / 2), L].
  std::size_t tokens_per_passage = 32;
  std::size_t dim = 64;
  std::size_t queries = 100;
  std::uint64_t seed = 0;
  std::size_t vocab_size = 2048;
  double zipf_exponent = 1.0;
  /// Norm of the Gaussian perturbation added to a word to form a token.
  double token_noise = 0.35;
  /// Norm of the perturbation added to a passage token to form a query term.
  double query_noise = 0.5;
  std::size_t query_terms = 32;
  /// Query terms copied from the target passage; the remaining terms are
  /// fresh draws from the vocabulary that match many passages.
  std::size_t target_terms = 10;
};

struct SyntheticDataset {
  TokenEmbeddingCollection corpus;
  TokenEmbeddingCollection queries;
  std::vector<std::uint32_t> relevant;  // target passage per query
};

SyntheticDataset generate_synthetic(const SyntheticOptions& opts);

/// Writes embeddings.bin, queries.bin and qrels.tsv (qid = query ordinal,
/// pid = passage ordinal).
void write_synthetic(const SyntheticDataset& data, const std::filesystem::path& dir);

}  // namespace emvb
