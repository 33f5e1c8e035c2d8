#include "emvb/embeddings_io.hpp"

#include <bit>
#include <fstream>
#include <string>

#include "emvb/error.hpp"

namespace emvb {

static_assert(std::endian::native == std::endian::little);

namespace fs = std::filesystem;

namespace {

template <class T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& is, const fs::path& path) {
  T value{};
  if (!is.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw Error(path.string() + ": truncated header");
  }
  return value;
}

}  // namespace

void save_embeddings(const TokenEmbeddingCollection& coll, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  put<std::uint32_t>(out, kEmbeddingsMagic);
  put<std::uint32_t>(out, kEmbeddingsVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(coll.dim()));
  put<std::uint64_t>(out, coll.num_passages());
  for (std::size_t p = 0; p < coll.num_passages(); ++p) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(coll.passage_length(p)));
  }
  const auto data = coll.data();
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size_bytes()));
  if (!out) throw Error("failed writing " + path.string());
}

TokenEmbeddingCollection load_embeddings(const fs::path& path,
                                         std::optional<std::size_t> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  if (get<std::uint32_t>(in, path) != kEmbeddingsMagic) {
    throw Error(path.string() + ": not an embeddings file (bad magic)");
  }
  if (const auto version = get<std::uint32_t>(in, path); version != kEmbeddingsVersion) {
    throw Error(path.string() + ": unsupported version " + std::to_string(version));
  }
  const std::size_t dim = get<std::uint32_t>(in, path);
  const std::size_t num_passages = get<std::uint64_t>(in, path);
  if (dim == 0) throw Error(path.string() + ": zero dimension");
  if (expected_dim && *expected_dim != dim) {
    throw Error(path.string() + ": dimension " + std::to_string(dim) + ", expected " +
                std::to_string(*expected_dim));
  }
  if (num_passages == 0) throw Error(path.string() + ": empty corpus (0 passages)");

  const std::size_t header = 3 * sizeof(std::uint32_t) + sizeof(std::uint64_t);
  const auto file_size = fs::file_size(path);
  if (file_size < header + num_passages * sizeof(std::uint32_t)) {
    throw Error(path.string() + ": truncated token counts");
  }
  std::vector<std::uint32_t> counts(num_passages);
  in.read(reinterpret_cast<char*>(counts.data()),
          static_cast<std::streamsize>(counts.size() * sizeof(std::uint32_t)));

  std::vector<std::uint64_t> offsets(num_passages + 1, 0);
  for (std::size_t p = 0; p < num_passages; ++p) offsets[p + 1] = offsets[p] + counts[p];
  const std::size_t floats = offsets.back() * dim;
  const std::size_t expected = header + num_passages * sizeof(std::uint32_t) + floats * sizeof(float);
  if (file_size != expected) {
    throw Error(path.string() + (file_size < expected ? ": truncated" : ": trailing bytes") +
                " (expected " + std::to_string(expected) + " bytes, found " +
                std::to_string(file_size) + ")");
  }
  std::vector<float> data(floats);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(floats * sizeof(float)));
  if (!in) throw Error(path.string() + ": truncated embeddings");

  TokenEmbeddingCollection coll(dim, std::move(data), std::move(offsets));
  if (const auto violations = validate_collection(coll); !violations.empty()) {
    throw Error(path.string() + ": " + describe(violations.front()) + " (" +
                std::to_string(violations.size()) + " violations)");
  }
  return coll;
}

std::vector<QueryMatrix> load_queries(const fs::path& path, std::optional<std::size_t> expected_dim) {
  const auto coll = load_embeddings(path, expected_dim);
  std::vector<QueryMatrix> queries;
  queries.reserve(coll.num_passages());
  for (std::size_t p = 0; p < coll.num_passages(); ++p) {
    queries.push_back(QueryMatrix::from_rows(coll.passage(p), coll.dim()));
  }
  return queries;
}

}  // namespace emvb
