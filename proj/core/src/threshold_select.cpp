#include "emvb/threshold_select.hpp"

#include <algorithm>
#include <bit>

#include "emvb/error.hpp"
#include "emvb/simd.hpp"

#if EMVB_HAVE_X86
#include <immintrin.h>
#endif

namespace emvb {
namespace {

std::size_t select_naive_if(std::span<const float> row, float th, std::uint32_t* out) {
  std::size_t n = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] > th) out[n++] = static_cast<std::uint32_t>(j);
  }
  return n;
}

std::size_t select_branchless(std::span<const float> row, float th, std::uint32_t* out) {
  std::size_t n = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    out[n] = static_cast<std::uint32_t>(j);
    n += static_cast<std::size_t>(row[j] > th);
  }
  return n;
}

// 16-lane block emulation for CPUs without AVX-512.
inline std::uint32_t block_mask(const float* p, std::size_t lanes, float th) noexcept {
  std::uint32_t mask = 0;
  for (std::size_t l = 0; l < lanes; ++l) mask |= static_cast<std::uint32_t>(p[l] > th) << l;
  return mask;
}

std::size_t select_vectorized_if_scalar(std::span<const float> row, float th, std::uint32_t* out) {
  std::size_t n = 0;
  for (std::size_t base = 0; base < row.size(); base += kSelectLanes) {
    const std::size_t lanes = std::min(kSelectLanes, row.size() - base);
    std::uint32_t mask = block_mask(row.data() + base, lanes, th);
    if (mask == 0) continue;
    while (mask != 0) {
      out[n++] = static_cast<std::uint32_t>(base + std::countr_zero(mask));
      mask &= mask - 1;
    }
  }
  return n;
}

std::size_t select_vectorized_branchless_scalar(std::span<const float> row, float th,
                                                std::uint32_t* out) {
  std::size_t n = 0;
  for (std::size_t base = 0; base < row.size(); base += kSelectLanes) {
    const std::size_t lanes = std::min(kSelectLanes, row.size() - base);
    const std::uint32_t mask = block_mask(row.data() + base, lanes, th);
    for (std::size_t l = 0; l < lanes; ++l) {
      out[n] = static_cast<std::uint32_t>(base + l);
      n += (mask >> l) & 1u;
    }
  }
  return n;
}

#if EMVB_HAVE_X86
EMVB_TARGET_AVX512
std::size_t select_vectorized_if_avx512(std::span<const float> row, float th, std::uint32_t* out) {
  const __m512 thv = _mm512_set1_ps(th);
  const std::size_t len = row.size();
  const float* data = row.data();
  std::size_t n = 0;
  std::size_t base = 0;
  for (; base + kSelectLanes <= len; base += kSelectLanes) {
    std::uint32_t mask = _mm512_cmp_ps_mask(_mm512_loadu_ps(data + base), thv, _CMP_GT_OQ);
    if (mask == 0) continue;
    while (mask != 0) {
      out[n++] = static_cast<std::uint32_t>(base + static_cast<std::size_t>(_tzcnt_u32(mask)));
      mask = _blsr_u32(mask);
    }
  }
  if (base < len) {
    const __mmask16 tail = static_cast<__mmask16>((1u << (len - base)) - 1u);
    std::uint32_t mask =
        _mm512_mask_cmp_ps_mask(tail, _mm512_maskz_loadu_ps(tail, data + base), thv, _CMP_GT_OQ);
    while (mask != 0) {
      out[n++] = static_cast<std::uint32_t>(base + static_cast<std::size_t>(_tzcnt_u32(mask)));
      mask = _blsr_u32(mask);
    }
  }
  return n;
}

EMVB_TARGET_AVX512
std::size_t select_vectorized_branchless_avx512(std::span<const float> row, float th,
                                                std::uint32_t* out) {
  const __m512 thv = _mm512_set1_ps(th);
  const __m512i step = _mm512_set1_epi32(static_cast<int>(kSelectLanes));
  __m512i idx = _mm512_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15);
  const std::size_t len = row.size();
  const float* data = row.data();
  std::size_t n = 0;
  std::size_t base = 0;
  for (; base + kSelectLanes <= len; base += kSelectLanes) {
    const __mmask16 mask = _mm512_cmp_ps_mask(_mm512_loadu_ps(data + base), thv, _CMP_GT_OQ);
    _mm512_mask_compressstoreu_epi32(out + n, mask, idx);
    n += static_cast<std::size_t>(_mm_popcnt_u32(mask));
    idx = _mm512_add_epi32(idx, step);
  }
  if (base < len) {
    const __mmask16 tail = static_cast<__mmask16>((1u << (len - base)) - 1u);
    const __mmask16 mask =
        _mm512_mask_cmp_ps_mask(tail, _mm512_maskz_loadu_ps(tail, data + base), thv, _CMP_GT_OQ);
    _mm512_mask_compressstoreu_epi32(out + n, mask, idx);
    n += static_cast<std::size_t>(_mm_popcnt_u32(mask));
  }
  return n;
}
#endif

}  // namespace

std::string_view to_string(SelectVariant v) noexcept {
  switch (v) {
    case SelectVariant::naive_if: return "naive_if";
    case SelectVariant::vectorized_if: return "vectorized_if";
    case SelectVariant::branchless: return "branchless";
    case SelectVariant::vectorized_branchless: return "vectorized_branchless";
  }
  return "unknown";
}

std::optional<SelectVariant> parse_select_variant(std::string_view name) noexcept {
  for (const auto v : kAllSelectVariants) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

std::size_t select_above_threshold(std::span<const float> row, float th, SelectVariant variant,
                                   std::span<std::uint32_t> out) {
  if (out.size() < row.size()) throw Error("selection buffer smaller than the row");
  const bool wide = simd::active_isa() == simd::Isa::avx512;
  switch (variant) {
    case SelectVariant::naive_if: return select_naive_if(row, th, out.data());
    case SelectVariant::branchless: return select_branchless(row, th, out.data());
    case SelectVariant::vectorized_if:
#if EMVB_HAVE_X86
      if (wide) return select_vectorized_if_avx512(row, th, out.data());
#endif
      return select_vectorized_if_scalar(row, th, out.data());
    case SelectVariant::vectorized_branchless:
#if EMVB_HAVE_X86
      if (wide) return select_vectorized_branchless_avx512(row, th, out.data());
#endif
      return select_vectorized_branchless_scalar(row, th, out.data());
  }
  (void)wide;
  return 0;
}

std::vector<std::uint32_t> select_above_threshold(std::span<const float> row, float th,
                                                  SelectVariant variant) {
  std::vector<std::uint32_t> out(row.size());
  out.resize(select_above_threshold(row, th, variant, out));
  return out;
}

void top_scoring_among(std::span<const float> row, std::span<const std::uint32_t> candidates,
                       std::size_t nprobe, std::vector<std::uint32_t>& out) {
  out.assign(candidates.begin(), candidates.end());
  const auto better = [&row](std::uint32_t a, std::uint32_t b) {
    return row[a] > row[b] || (row[a] == row[b] && a < b);
  };
  if (nprobe < out.size()) {
    std::nth_element(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(nprobe), out.end(),
                     better);
    out.resize(nprobe);
  }
  std::sort(out.begin(), out.end(), better);
}

void top_nprobe_from_survivors(std::span<const float> row,
                               std::span<const std::uint32_t> survivors, std::size_t nprobe,
                               std::vector<std::uint32_t>& out) {
  if (nprobe == 0) throw Error("nprobe must be at least 1");
  if (!survivors.empty()) {
    top_scoring_among(row, survivors, nprobe, out);
    return;
  }
  std::vector<std::uint32_t> all(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) all[j] = static_cast<std::uint32_t>(j);
  top_scoring_among(row, all, nprobe, out);
}

std::vector<std::uint32_t> top_nprobe_filtered(std::span<const float> row, float th,
                                               std::size_t nprobe, SelectVariant variant) {
  const auto survivors = select_above_threshold(row, th, variant);
  std::vector<std::uint32_t> out;
  top_nprobe_from_survivors(row, survivors, nprobe, out);
  return out;
}

}  // namespace emvb
