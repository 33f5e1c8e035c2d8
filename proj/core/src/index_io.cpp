#include "emvb/index_io.hpp"

#include <bit>
#include <fstream>
#include <string>

#include <json.hpp>

#include "emvb/error.hpp"

namespace emvb {

static_assert(std::endian::native == std::endian::little,
              "index files are little-endian and written without byte swapping");

namespace fs = std::filesystem;

namespace {

template <class T>
void write_vector(const fs::path& path, std::span<const T> values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size_bytes()));
  if (!out) throw Error("failed writing " + path.string());
}

template <class T>
std::vector<T> read_vector(const fs::path& path, std::size_t expected_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const auto size = fs::file_size(path);
  if (size != expected_count * sizeof(T)) {
    throw Error(path.filename().string() + ": expected " +
                std::to_string(expected_count * sizeof(T)) + " bytes, found " +
                std::to_string(size));
  }
  std::vector<T> values(expected_count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(size));
  if (!in) throw Error("failed reading " + path.string());
  return values;
}

}  // namespace

void check_index(const Index& index) {
  const auto& ci = index.centroids;
  const auto& corpus = index.corpus;
  const std::size_t num_centroids = ci.num_centroids();
  if (ci.dim == 0 || ci.centroids.size() % ci.dim != 0) throw Error("malformed centroid matrix");
  if (corpus.pq.dim() != ci.dim) throw Error("codebook and centroid dimensions differ");

  const auto& offsets = corpus.passage_offsets;
  if (offsets.empty() || offsets.front() != 0) throw Error("passage offsets must start at 0");
  for (std::size_t p = 1; p < offsets.size(); ++p) {
    if (offsets[p] <= offsets[p - 1]) throw Error("passage offsets must be strictly increasing");
  }
  if (offsets.back() != corpus.token_cids.size()) {
    throw Error("passage offsets do not end at total_tokens");
  }
  if (corpus.pq_codes.size() != corpus.token_cids.size() * corpus.pq.m()) {
    throw Error("pq_codes size does not match total_tokens x m");
  }
  for (const auto c : corpus.token_cids) {
    if (c >= num_centroids) throw Error("token centroid id out of range");
  }
  if (index.has_exact_residuals() && index.exact_residuals.size() != corpus.total_tokens() * ci.dim) {
    throw Error("exact residuals do not match total_tokens x dim");
  }

  const auto& lists = ci.inverted_lists;
  if (lists.num_lists() != num_centroids || lists.offsets.front() != 0 ||
      lists.offsets.back() != lists.ids.size()) {
    throw Error("malformed inverted lists");
  }
  std::size_t expected_entries = 0;
  std::vector<std::uint32_t> last(num_centroids, static_cast<std::uint32_t>(-1));
  for (std::size_t p = 0; p < corpus.num_passages(); ++p) {
    for (const auto c : corpus.passage_cids(p)) {
      if (last[c] != p) {
        last[c] = static_cast<std::uint32_t>(p);
        ++expected_entries;
      }
    }
  }
  for (std::size_t c = 0; c < num_centroids; ++c) {
    if (lists.offsets[c + 1] < lists.offsets[c]) throw Error("malformed inverted lists");
    const auto list = lists.list(c);
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i > 0 && list[i] <= list[i - 1]) throw Error("inverted list not strictly increasing");
      if (list[i] >= corpus.num_passages()) throw Error("inverted list passage id out of range");
      bool found = false;
      for (const auto cid : corpus.passage_cids(list[i])) found |= (cid == c);
      if (!found) throw Error("inverted list entry without a matching token");
    }
  }
  if (expected_entries != lists.ids.size()) throw Error("inverted lists are incomplete");
}

void save_index(const Index& index, const fs::path& dir) {
  check_index(index);
  fs::create_directories(dir);
  const auto& ci = index.centroids;
  const auto& corpus = index.corpus;

  nlohmann::json meta = {
      {"version", kIndexFormatVersion},
      {"d", ci.dim},
      {"m", corpus.pq.m()},
      {"num_centroids", ci.num_centroids()},
      {"n_passages", corpus.num_passages()},
      {"total_tokens", corpus.total_tokens()},
      {"has_rotation", corpus.pq.has_rotation()},
      {"has_exact_residuals", index.has_exact_residuals()},
  };
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';

  write_vector<float>(dir / "centroids.f32", ci.centroids);

  std::vector<std::uint32_t> ivf;
  ivf.reserve(ci.num_centroids() + ci.inverted_lists.ids.size());
  for (std::size_t c = 0; c < ci.num_centroids(); ++c) {
    ivf.push_back(static_cast<std::uint32_t>(ci.inverted_lists.list(c).size()));
  }
  ivf.insert(ivf.end(), ci.inverted_lists.ids.begin(), ci.inverted_lists.ids.end());
  write_vector<std::uint32_t>(dir / "ivf.bin", ivf);

  write_vector<std::uint32_t>(dir / "token_cids.u32", corpus.token_cids);
  write_vector<std::uint8_t>(dir / "pq_codes.u8", corpus.pq_codes);
  write_vector<std::uint64_t>(dir / "offsets.u64", corpus.passage_offsets);
  write_vector<float>(dir / "codebook.f32", corpus.pq.codewords());
  if (corpus.pq.has_rotation()) write_vector<float>(dir / "rotation.f32", corpus.pq.rotation());
  if (index.has_exact_residuals()) write_vector<float>(dir / "residuals.f32", index.exact_residuals);
}

IndexMeta read_index_meta(const fs::path& dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw Error("cannot open " + (dir / "meta.json").string());
  nlohmann::json j;
  try {
    in >> j;
    IndexMeta meta;
    meta.version = j.at("version").get<std::uint32_t>();
    meta.dim = j.at("d").get<std::size_t>();
    meta.m = j.at("m").get<std::size_t>();
    meta.num_centroids = j.at("num_centroids").get<std::size_t>();
    meta.num_passages = j.at("n_passages").get<std::size_t>();
    meta.total_tokens = j.at("total_tokens").get<std::size_t>();
    meta.has_rotation = j.value("has_rotation", false);
    meta.has_exact_residuals = j.value("has_exact_residuals", false);
    if (meta.version != kIndexFormatVersion) {
      throw Error("unsupported index version " + std::to_string(meta.version));
    }
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed meta.json: ") + e.what());
  }
}

Index load_index(const fs::path& dir) {
  const IndexMeta meta = read_index_meta(dir);
  Index index;
  auto& ci = index.centroids;
  auto& corpus = index.corpus;

  ci.dim = meta.dim;
  ci.centroids = read_vector<float>(dir / "centroids.f32", meta.num_centroids * meta.dim);

  if (!fs::exists(dir / "ivf.bin")) throw Error("missing " + (dir / "ivf.bin").string());
  const auto ivf_bytes = fs::file_size(dir / "ivf.bin");
  if (ivf_bytes % sizeof(std::uint32_t) != 0 ||
      ivf_bytes / sizeof(std::uint32_t) < meta.num_centroids) {
    throw Error("ivf.bin is truncated");
  }
  const auto ivf = read_vector<std::uint32_t>(dir / "ivf.bin", ivf_bytes / sizeof(std::uint32_t));
  ci.inverted_lists.offsets.assign(meta.num_centroids + 1, 0);
  for (std::size_t c = 0; c < meta.num_centroids; ++c) {
    ci.inverted_lists.offsets[c + 1] = ci.inverted_lists.offsets[c] + ivf[c];
  }
  if (ci.inverted_lists.offsets.back() != ivf.size() - meta.num_centroids) {
    throw Error("ivf.bin list lengths do not match its payload");
  }
  ci.inverted_lists.ids.assign(ivf.begin() + static_cast<std::ptrdiff_t>(meta.num_centroids),
                               ivf.end());

  corpus.token_cids = read_vector<std::uint32_t>(dir / "token_cids.u32", meta.total_tokens);
  corpus.pq_codes = read_vector<std::uint8_t>(dir / "pq_codes.u8", meta.total_tokens * meta.m);
  corpus.passage_offsets = read_vector<std::uint64_t>(dir / "offsets.u64", meta.num_passages + 1);
  corpus.pq = PQCodebook(meta.dim, meta.m,
                         read_vector<float>(dir / "codebook.f32", meta.dim * kCodewordsPerSubspace));
  if (meta.has_rotation) {
    corpus.pq.set_rotation(read_vector<float>(dir / "rotation.f32", meta.dim * meta.dim));
  }
  if (meta.has_exact_residuals) {
    index.exact_residuals = read_vector<float>(dir / "residuals.f32", meta.total_tokens * meta.dim);
  }
  check_index(index);
  return index;
}

double bytes_per_embedding_on_disk(const fs::path& dir) {
  const IndexMeta meta = read_index_meta(dir);
  const auto bytes = fs::file_size(dir / "token_cids.u32") + fs::file_size(dir / "pq_codes.u8");
  return static_cast<double>(bytes) / static_cast<double>(meta.total_tokens);
}

}  // namespace emvb
