#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "emvb/model.hpp"

namespace emvb {

/// Binary embeddings file, little-endian:
///   u32 magic ("EMVE"), u32 version, u32 dim, u64 num_passages,
///   num_passages x u32 token counts,
///   total_tokens x dim f32, row-major.
/// The same layout stores query sets, one "passage" per query.
inline constexpr std::uint32_t kEmbeddingsMagic = 0x45564D45u;
inline constexpr std::uint32_t kEmbeddingsVersion = 1;

void save_embeddings(const TokenEmbeddingCollection& coll, const std::filesystem::path& path);

/// Throws emvb::Error on bad magic or version, truncation, zero passages,
/// a dimension different from expected_dim, or any validation violation.
TokenEmbeddingCollection load_embeddings(const std::filesystem::path& path,
                                         std::optional<std::size_t> expected_dim = std::nullopt);

/// Query matrices from an embeddings file; queries longer than kQueryTerms
/// are truncated with a warning.
std::vector<QueryMatrix> load_queries(const std::filesystem::path& path,
                                      std::optional<std::size_t> expected_dim = std::nullopt);

}  // namespace emvb
