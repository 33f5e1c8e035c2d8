#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace emvb {

/// Strategies for extracting {j : row[j] > th}.
///
///  - naive_if: scalar scan with a data-dependent branch per element.
///  - vectorized_if: 16 lanes per step; blocks with an all-zero comparison
///    mask are skipped, otherwise the set lanes are extracted one by one.
///  - branchless: scalar scan that always writes j at the cursor and then
///    advances the cursor by the 0/1 comparison outcome.
///  - vectorized_branchless: 16 lanes per step, selected lane indices are
///    compressed to the cursor in one store.
enum class SelectVariant { naive_if, vectorized_if, branchless, vectorized_branchless };

inline constexpr std::array<SelectVariant, 4> kAllSelectVariants = {
    SelectVariant::naive_if, SelectVariant::vectorized_if, SelectVariant::branchless,
    SelectVariant::vectorized_branchless};

inline constexpr std::size_t kSelectLanes = 16;

std::string_view to_string(SelectVariant v) noexcept;
std::optional<SelectVariant> parse_select_variant(std::string_view name) noexcept;

/// Writes the indices j with row[j] > th to out in increasing order and
/// returns how many were written. out must hold at least row.size() entries;
/// entries past the returned count are unspecified. All variants return the
/// same list on both the scalar and AVX-512 paths.
std::size_t select_above_threshold(std::span<const float> row, float th, SelectVariant variant,
                                   std::span<std::uint32_t> out);

std::vector<std::uint32_t> select_above_threshold(std::span<const float> row, float th,
                                                  SelectVariant variant);

/// The nprobe highest-scoring ids among candidates (all of them if there are
/// fewer), ordered by score descending then id ascending.
void top_scoring_among(std::span<const float> row, std::span<const std::uint32_t> candidates,
                       std::size_t nprobe, std::vector<std::uint32_t>& out);

/// Top-nprobe centroids among those scoring above th. When none clears th
/// the full row is ranked instead.
std::vector<std::uint32_t> top_nprobe_filtered(std::span<const float> row, float th,
                                               std::size_t nprobe,
                                               SelectVariant variant = SelectVariant::vectorized_if);

/// Same as above reusing survivors already produced by
/// select_above_threshold on this row.
void top_nprobe_from_survivors(std::span<const float> row,
                               std::span<const std::uint32_t> survivors, std::size_t nprobe,
                               std::vector<std::uint32_t>& out);

}  // namespace emvb
