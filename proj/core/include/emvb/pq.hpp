#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace emvb {

/// Codewords per sub-space; sub-codes are one byte.
inline constexpr std::size_t kCodewordsPerSubspace = 256;

/// Product quantizer over d-dimensional residuals split into m sub-vectors of
/// d / m components. An optional orthogonal rotation R is applied before
/// splitting, so codes live in the rotated space: encode(r) quantizes R r and
/// decode returns R^T of the reconstruction.
class PQCodebook {
 public:
  PQCodebook() = default;

  /// Zero codewords, no rotation. Throws if dim is not divisible by m.
  PQCodebook(std::size_t dim, std::size_t m);

  /// codewords holds m x 256 x (dim / m) floats.
  PQCodebook(std::size_t dim, std::size_t m, std::vector<float> codewords);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t sub_dim() const noexcept { return m_ == 0 ? 0 : dim_ / m_; }

  std::span<const float> codewords() const noexcept { return codewords_; }
  std::span<const float> codeword(std::size_t s, std::size_t c) const {
    return {codewords_.data() + (s * kCodewordsPerSubspace + c) * sub_dim(), sub_dim()};
  }
  std::span<float> mutable_codeword(std::size_t s, std::size_t c) {
    return {codewords_.data() + (s * kCodewordsPerSubspace + c) * sub_dim(), sub_dim()};
  }

  /// Row-major dim x dim. Throws unless R^T R = I within 1e-4.
  void set_rotation(std::vector<float> rotation);
  bool has_rotation() const noexcept { return !rotation_.empty(); }
  std::span<const float> rotation() const noexcept { return rotation_; }

  /// out = R x (a copy without rotation).
  void rotate(std::span<const float> x, std::span<float> out) const;
  /// out = R^T x.
  void unrotate(std::span<const float> x, std::span<float> out) const;

  /// Nearest codeword per sub-space of R r; ties go to the lower code.
  void encode(std::span<const float> residual, std::span<std::uint8_t> codes) const;
  /// Reconstruction in the rotated space.
  void decode_rotated(std::span<const std::uint8_t> codes, std::span<float> out) const;
  /// Reconstruction in the original space.
  void decode(std::span<const std::uint8_t> codes, std::span<float> out) const;

  bool operator==(const PQCodebook&) const = default;

 private:
  std::size_t dim_ = 0;
  std::size_t m_ = 0;
  std::vector<float> codewords_;
  std::vector<float> rotation_;
};

/// Max |R^T R - I| over all entries.
double orthogonality_error(std::span<const float> rotation, std::size_t dim);

}  // namespace emvb
