#include "emvb/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "emvb/embeddings_io.hpp"
#include "emvb/error.hpp"

namespace emvb {
namespace {

void normalize(std::span<float> v) {
  double norm = 0.0;
  for (const float x : v) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  for (float& x : v) x = static_cast<float>(x / norm);
}

// base + Gaussian noise of expected norm `scale`, renormalized.
void perturb(std::span<const float> base, double scale, std::mt19937_64& rng,
             std::span<float> out) {
  std::normal_distribution<double> gauss(0.0, scale / std::sqrt(static_cast<double>(base.size())));
  for (std::size_t d = 0; d < base.size(); ++d) out[d] = static_cast<float>(base[d] + gauss(rng));
  normalize(out);
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticOptions& opts) {
  if (opts.passages == 0 || opts.tokens_per_passage == 0 || opts.dim == 0 || opts.vocab_size == 0 ||
      opts.query_terms == 0) {
    throw Error("synthetic corpus needs positive passages, tokens, dim, vocabulary and query terms");
  }
  const std::size_t dim = opts.dim;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<float> vocab(opts.vocab_size * dim);
  for (std::size_t w = 0; w < opts.vocab_size; ++w) {
    auto word = std::span<float>(vocab).subspan(w * dim, dim);
    for (float& x : word) x = static_cast<float>(gauss(rng));
    normalize(word);
  }
  std::vector<double> weights(opts.vocab_size);
  for (std::size_t r = 0; r < opts.vocab_size; ++r) {
    weights[r] = 1.0 / std::pow(static_cast<double>(r + 1), opts.zipf_exponent);
  }
  std::discrete_distribution<std::size_t> draw_word(weights.begin(), weights.end());
  const std::size_t min_len = (opts.tokens_per_passage + 1) / 2;
  std::uniform_int_distribution<std::size_t> draw_len(min_len, opts.tokens_per_passage);

  SyntheticDataset data;
  data.corpus = TokenEmbeddingCollection(dim);
  std::vector<float> passage;
  for (std::size_t p = 0; p < opts.passages; ++p) {
    const std::size_t len = draw_len(rng);
    passage.resize(len * dim);
    for (std::size_t t = 0; t < len; ++t) {
      const std::size_t w = draw_word(rng);
      perturb(std::span<const float>(vocab).subspan(w * dim, dim), opts.token_noise, rng,
              std::span<float>(passage).subspan(t * dim, dim));
    }
    data.corpus.add_passage(passage);
  }

  data.queries = TokenEmbeddingCollection(dim);
  std::uniform_int_distribution<std::size_t> draw_passage(0, opts.passages - 1);
  std::vector<std::size_t> order;
  std::vector<float> query;
  for (std::size_t qi = 0; qi < opts.queries; ++qi) {
    const std::size_t target = draw_passage(rng);
    const std::size_t len = data.corpus.passage_length(target);
    order.resize(len);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_terms = std::min(opts.query_terms, kQueryTerms);
    const std::size_t n_copied = std::min({len, opts.target_terms, n_terms});
    query.resize(n_terms * dim);
    const std::size_t first = data.corpus.offsets()[target];
    for (std::size_t i = 0; i < n_copied; ++i) {
      perturb(data.corpus.token(first + order[i]), opts.query_noise, rng,
              std::span<float>(query).subspan(i * dim, dim));
    }
    for (std::size_t i = n_copied; i < n_terms; ++i) {
      const std::size_t w = draw_word(rng);
      perturb(std::span<const float>(vocab).subspan(w * dim, dim), opts.token_noise, rng,
              std::span<float>(query).subspan(i * dim, dim));
    }
    data.queries.add_passage(query);
    data.relevant.push_back(static_cast<std::uint32_t>(target));
  }
  return data;
}

void write_synthetic(const SyntheticDataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_embeddings(data.corpus, dir / "embeddings.bin");
  save_embeddings(data.queries, dir / "queries.bin");
  std::ofstream qrels(dir / "qrels.tsv");
  if (!qrels) throw Error("cannot write " + (dir / "qrels.tsv").string());
  for (std::size_t q = 0; q < data.relevant.size(); ++q) {
    qrels << q << '\t' << data.relevant[q] << "\t1\n";
  }
}

}  // namespace emvb
