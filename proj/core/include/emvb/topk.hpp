#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "emvb/model.hpp"

namespace emvb {

/// Keeps the k best entries under ranks_before() and sorts them.
inline void keep_top_k(std::vector<ScoredPassage>& scored, std::size_t k) {
  if (k < scored.size()) {
    std::nth_element(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                     scored.end(), ranks_before);
    scored.resize(k);
  }
  std::sort(scored.begin(), scored.end(), ranks_before);
}

}  // namespace emvb
