#include "emvb/pq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "emvb/error.hpp"

namespace emvb {

PQCodebook::PQCodebook(std::size_t dim, std::size_t m)
    : PQCodebook(dim, m, std::vector<float>(dim * kCodewordsPerSubspace, 0.0f)) {}

PQCodebook::PQCodebook(std::size_t dim, std::size_t m, std::vector<float> codewords)
    : dim_(dim), m_(m), codewords_(std::move(codewords)) {
  if (m_ == 0 || dim_ == 0 || dim_ % m_ != 0) {
    throw Error("PQ requires a positive dimension divisible by m (dim=" + std::to_string(dim_) +
                ", m=" + std::to_string(m_) + ")");
  }
  if (codewords_.size() != dim_ * kCodewordsPerSubspace) {
    throw Error("PQ codebook must hold m x 256 x dim/m floats");
  }
}

double orthogonality_error(std::span<const float> rotation, std::size_t dim) {
  double worst = 0.0;
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = 0; b < dim; ++b) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        acc += static_cast<double>(rotation[k * dim + a]) * rotation[k * dim + b];
      }
      worst = std::max(worst, std::fabs(acc - (a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

void PQCodebook::set_rotation(std::vector<float> rotation) {
  if (rotation.size() != dim_ * dim_) throw Error("rotation must be dim x dim");
  if (orthogonality_error(rotation, dim_) > 1e-4) throw Error("rotation is not orthogonal");
  rotation_ = std::move(rotation);
}

void PQCodebook::rotate(std::span<const float> x, std::span<float> out) const {
  if (rotation_.empty()) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    float acc = 0.0f;
    const float* row = rotation_.data() + i * dim_;
    for (std::size_t k = 0; k < dim_; ++k) acc += row[k] * x[k];
    out[i] = acc;
  }
}

void PQCodebook::unrotate(std::span<const float> x, std::span<float> out) const {
  if (rotation_.empty()) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    float acc = 0.0f;
    for (std::size_t k = 0; k < dim_; ++k) acc += rotation_[k * dim_ + i] * x[k];
    out[i] = acc;
  }
}

void PQCodebook::encode(std::span<const float> residual, std::span<std::uint8_t> codes) const {
  std::vector<float> rotated(dim_);
  rotate(residual, rotated);
  const std::size_t ds = sub_dim();
  for (std::size_t s = 0; s < m_; ++s) {
    const float* x = rotated.data() + s * ds;
    float best = std::numeric_limits<float>::infinity();
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < kCodewordsPerSubspace; ++c) {
      const float* cw = codewords_.data() + (s * kCodewordsPerSubspace + c) * ds;
      float d = 0.0f;
      for (std::size_t k = 0; k < ds; ++k) {
        const float diff = x[k] - cw[k];
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    codes[s] = static_cast<std::uint8_t>(best_c);
  }
}

void PQCodebook::decode_rotated(std::span<const std::uint8_t> codes, std::span<float> out) const {
  const std::size_t ds = sub_dim();
  for (std::size_t s = 0; s < m_; ++s) {
    const auto cw = codeword(s, codes[s]);
    std::copy(cw.begin(), cw.end(), out.begin() + static_cast<std::ptrdiff_t>(s * ds));
  }
}

void PQCodebook::decode(std::span<const std::uint8_t> codes, std::span<float> out) const {
  if (rotation_.empty()) {
    decode_rotated(codes, out);
    return;
  }
  std::vector<float> rotated(dim_);
  decode_rotated(codes, rotated);
  unrotate(rotated, out);
}

}  // namespace emvb
