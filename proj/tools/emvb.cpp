// emvb command line: index building, search, evaluation, benchmarks and
// synthetic data.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "emvb/bench.hpp"
#include "emvb/embeddings_io.hpp"
#include "emvb/engine.hpp"
#include "emvb/error.hpp"
#include "emvb/index_builder.hpp"
#include "emvb/index_io.hpp"
#include "emvb/metrics.hpp"
#include "emvb/simd.hpp"
#include "emvb/synthetic.hpp"
#include "emvb/threshold_select.hpp"
#include "emvb/trec.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace emvb;

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

/// Row-major d x d float32 file.
std::vector<float> read_rotation(const fs::path& path, std::size_t dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<float> r(dim * dim);
  in.read(reinterpret_cast<char*>(r.data()), static_cast<std::streamsize>(r.size() * sizeof(float)));
  if (!in || in.peek() != std::char_traits<char>::eof()) {
    throw Error("rotation file must hold exactly " + std::to_string(dim * dim) + " floats");
  }
  return r;
}

SearchConfig config_from_json(const json& j, SearchConfig cfg) {
  if (j.contains("k")) {
    cfg = SearchConfig::for_k(j.at("k").get<std::size_t>());
  }
  if (j.contains("nprobe")) cfg.nprobe = j.at("nprobe").get<std::size_t>();
  if (j.contains("th")) cfg.th = j.at("th").get<float>();
  if (j.contains("n_filter")) cfg.n_filter = j.at("n_filter").get<std::size_t>();
  if (j.contains("ndocs")) cfg.ndocs = j.at("ndocs").get<std::size_t>();
  if (j.contains("th_r")) cfg.th_r = j.at("th_r").get<float>();
  return cfg;
}

struct BuildArgs {
  std::string embeddings, out, rotation;
  std::size_t centroids = 0, m = 16, iters = 10;
  std::uint64_t seed = 0;
  bool exact = false;
};

void run_build(const BuildArgs& a) {
  const auto coll = load_embeddings(a.embeddings);
  BuildOptions opts;
  opts.num_centroids = a.centroids;
  opts.m = a.m;
  opts.iters = a.iters;
  opts.pq_iters = a.iters;
  opts.seed = a.seed;
  opts.keep_exact_residuals = a.exact;
  if (!a.rotation.empty()) opts.rotation = read_rotation(a.rotation, coll.dim());
  const auto index = build_index(coll, opts);
  save_index(index, a.out);
  std::cout << fmt::format("wrote {} ({} passages, {} tokens, {} centroids, {} bytes/embedding)\n",
                           a.out, index.corpus.num_passages(), index.corpus.total_tokens(),
                           index.centroids.num_centroids(), bytes_per_embedding_on_disk(a.out));
}

struct SearchArgs {
  std::string index, queries, out, tag = "emvb";
  std::size_t k = 10;
  std::optional<std::size_t> nprobe, n_filter, ndocs;
  std::optional<float> th, th_r;
  std::string variant = "vectorized_if";
};

void run_search(const SearchArgs& a) {
  const auto index = load_index(a.index);
  const auto variant = parse_select_variant(a.variant);
  if (!variant) throw Error("unknown select variant " + a.variant);
  const SearchEngine engine(index, ResidualMode::pq, *variant);
  const auto queries = load_queries(a.queries, index.dim());

  auto cfg = SearchConfig::for_k(a.k);
  if (a.nprobe) cfg.nprobe = *a.nprobe;
  if (a.th) cfg.th = *a.th;
  if (a.n_filter) cfg.n_filter = *a.n_filter;
  if (a.ndocs) cfg.ndocs = *a.ndocs;
  if (a.th_r) cfg.th_r = *a.th_r;

  auto out = open_out(a.out);
  auto scratch = engine.make_scratch();
  std::vector<double> totals;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto result = engine.search(queries[q], cfg, scratch);
    write_run(out, std::to_string(q), result.hits, a.tag);
    totals.push_back(result.timings.total_ms);
  }
  const auto s = bench::summarize(totals);
  std::cout << fmt::format("{} queries, latency mean {:.3f} ms, p50 {:.3f} ms, p99 {:.3f} ms\n",
                           queries.size(), s.mean, s.p50, s.p99);
}

void run_evaluate(const std::string& run_path, const std::string& qrels_path,
                  const std::string& metrics) {
  const auto specs = parse_metrics(metrics);
  const auto run = read_run(fs::path(run_path));
  const auto qrels = read_qrels(fs::path(qrels_path));
  for (const auto& spec : specs) {
    std::cout << fmt::format("{}\t{:.4f}\n", spec.name, evaluate_metric(spec, run, qrels));
  }
}

std::vector<SelectVariant> parse_variants(const std::string& list) {
  if (list == "all") return {kAllSelectVariants.begin(), kAllSelectVariants.end()};
  std::vector<SelectVariant> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const auto name = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto v = parse_select_variant(name);
    if (!v) throw Error("unknown select variant " + name);
    out.push_back(*v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-vector dense retrieval engine"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build-index", "Train centroids and PQ, write an index directory");
  build_cmd->add_option("--embeddings", build.embeddings, "Embeddings file")->required();
  build_cmd->add_option("--out", build.out, "Output directory")->required();
  build_cmd->add_option("--centroids", build.centroids, "Number of centroids")->required();
  build_cmd->add_option("--m", build.m, "PQ sub-spaces")->check(CLI::IsMember({16, 32}));
  build_cmd->add_option("--iters", build.iters, "k-means iterations");
  build_cmd->add_option("--seed", build.seed, "Random seed");
  build_cmd->add_option("--rotation", build.rotation, "Row-major d x d float32 orthogonal matrix");
  build_cmd->add_flag("--exact-residuals", build.exact, "Also store full-precision residuals");

  SearchArgs search;
  auto* search_cmd = app.add_subcommand("search", "Run queries and write a TREC run");
  search_cmd->add_option("--index", search.index, "Index directory")->required();
  search_cmd->add_option("--queries", search.queries, "Query embeddings file")->required();
  search_cmd->add_option("--k", search.k, "Results per query");
  search_cmd->add_option("--nprobe", search.nprobe, "Centroids probed per query term");
  search_cmd->add_option("--th", search.th, "Close-set threshold");
  search_cmd->add_option("--n-filter", search.n_filter, "Passages kept by the pre-filter");
  search_cmd->add_option("--ndocs", search.ndocs, "Passages kept by centroid interaction");
  search_cmd->add_option("--th-r", search.th_r, "Late interaction residual threshold");
  search_cmd->add_option("--variant", search.variant, "Threshold selection variant");
  search_cmd->add_option("--tag", search.tag, "Run tag");
  search_cmd->add_option("--out", search.out, "Output run file")->required();

  std::string run_path, qrels_path, metrics = "mrr@10,recall@100,success@5";
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a run against qrels");
  eval_cmd->add_option("--run", run_path)->required();
  eval_cmd->add_option("--qrels", qrels_path)->required();
  eval_cmd->add_option("--metrics", metrics, "Comma separated, e.g. mrr@10,recall@100");

  auto* bench_cmd = app.add_subcommand("bench", "Benchmarks");
  bench_cmd->require_subcommand(1);

  std::size_t sel_len = 262144, sel_reps = 15;
  std::string sel_grid = "0.1:0.7:0.1", sel_variants = "all", sel_csv;
  std::uint64_t sel_seed = 0;
  auto* sel_cmd = bench_cmd->add_subcommand("select", "Threshold selection ns/element");
  sel_cmd->add_option("--len", sel_len, "Row length");
  sel_cmd->add_option("--th-grid", sel_grid, "lo:hi:step");
  sel_cmd->add_option("--variants", sel_variants, "all or a comma separated list");
  sel_cmd->add_option("--reps", sel_reps, "Repetitions, best is kept");
  sel_cmd->add_option("--seed", sel_seed);
  sel_cmd->add_option("--csv", sel_csv, "Output CSV")->required();

  std::size_t mem_centroids = std::size_t{1} << 18, mem_passages = 2000, mem_tokens = 64, mem_reps = 5;
  double mem_density = 0.01;
  auto* mem_cmd = bench_cmd->add_subcommand("membership", "Stacked vs per-term bit vectors");
  mem_cmd->add_option("--centroids", mem_centroids);
  mem_cmd->add_option("--passages", mem_passages);
  mem_cmd->add_option("--tokens", mem_tokens);
  mem_cmd->add_option("--density", mem_density, "Probability a (term, centroid) bit is set");
  mem_cmd->add_option("--reps", mem_reps);

  std::string e2e_index, e2e_queries, e2e_grid, e2e_csv;
  auto* e2e_cmd = bench_cmd->add_subcommand("e2e", "Per-phase latency over a config grid");
  e2e_cmd->add_option("--index", e2e_index)->required();
  e2e_cmd->add_option("--queries", e2e_queries)->required();
  e2e_cmd->add_option("--grid", e2e_grid, "JSON array of config objects")->required();
  e2e_cmd->add_option("--csv", e2e_csv)->required();

  SyntheticOptions syn;
  std::string syn_out;
  auto* syn_cmd = app.add_subcommand("gen-synthetic", "Write a planted-relevance corpus");
  syn_cmd->add_option("--passages", syn.passages);
  syn_cmd->add_option("--tokens-per-passage", syn.tokens_per_passage);
  syn_cmd->add_option("--dim", syn.dim);
  syn_cmd->add_option("--queries", syn.queries);
  syn_cmd->add_option("--seed", syn.seed);
  syn_cmd->add_option("--target-terms", syn.target_terms, "Query terms copied from the target");
  syn_cmd->add_option("--query-noise", syn.query_noise);
  syn_cmd->add_option("--out", syn_out)->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::debug("isa {}", simd::to_string(simd::active_isa()));

  try {
    if (*build_cmd) {
      run_build(build);
    } else if (*search_cmd) {
      run_search(search);
    } else if (*eval_cmd) {
      run_evaluate(run_path, qrels_path, metrics);
    } else if (*sel_cmd) {
      const auto grid = bench::parse_grid(sel_grid);
      const auto variants = parse_variants(sel_variants);
      const auto rows = bench::bench_select(sel_len, grid, variants, sel_reps, sel_seed);
      auto out = open_out(sel_csv);
      bench::write_select_csv(out, rows);
      bench::write_select_csv(std::cout, rows);
    } else if (*mem_cmd) {
      const auto r = bench::bench_membership(mem_centroids, mem_passages, mem_tokens, mem_density,
                                             mem_reps, 0);
      std::cout << fmt::format("stacked {:.1f} ns/passage, per-term {:.1f} ns/passage, speedup {:.1f}x\n",
                               r.stacked_ns_per_passage, r.per_term_ns_per_passage, r.speedup());
    } else if (*e2e_cmd) {
      const auto index = load_index(e2e_index);
      const SearchEngine engine(index);
      const auto queries = load_queries(e2e_queries, index.dim());
      std::ifstream grid_in(e2e_grid);
      if (!grid_in) throw Error("cannot open " + e2e_grid);
      const auto grid = json::parse(grid_in);
      if (!grid.is_array()) throw Error("grid must be a JSON array of config objects");
      std::vector<SearchConfig> configs;
      for (const auto& entry : grid) configs.push_back(config_from_json(entry, SearchConfig{}));
      const auto rows = bench::bench_e2e(engine, queries, configs);
      auto out = open_out(e2e_csv);
      bench::write_e2e_csv(out, rows);
      bench::write_e2e_csv(std::cout, rows);
    } else if (*syn_cmd) {
      const auto data = generate_synthetic(syn);
      write_synthetic(data, syn_out);
      std::cout << fmt::format("wrote {} passages and {} queries to {}\n", data.corpus.num_passages(),
                               data.queries.num_passages(), syn_out);
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
