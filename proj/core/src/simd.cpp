#include "emvb/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "emvb/error.hpp"

namespace emvb::simd {
namespace {

Isa probe() noexcept {
#if EMVB_HAVE_X86
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512bw") &&
      __builtin_cpu_supports("avx512vl") && __builtin_cpu_supports("avx512dq")) {
    return Isa::avx512;
  }
#endif
  return Isa::scalar;
}

Isa initial() noexcept {
  // EMVB_FORCE_SCALAR=1 pins the scalar kernels for a whole process.
  if (const char* env = std::getenv("EMVB_FORCE_SCALAR"); env != nullptr && env[0] == '1') {
    return Isa::scalar;
  }
  return probe();
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{initial()};
  return isa;
}

}  // namespace

Isa detected_isa() noexcept {
  static const Isa isa = probe();
  return isa;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx512 && detected_isa() != Isa::avx512) {
    throw Error("AVX-512 kernels requested but the CPU does not support them");
  }
  current().store(isa, std::memory_order_relaxed);
}

std::string_view to_string(Isa isa) noexcept {
  return isa == Isa::avx512 ? "avx512" : "scalar";
}

}  // namespace emvb::simd
