#pragma once

#include <string_view>

namespace emvb::simd {

/// Instruction set used by the hot kernels. Every kernel has a scalar path
/// producing bit-identical output to its AVX-512 path.
enum class Isa { scalar, avx512 };

/// Best instruction set supported by the running CPU.
Isa detected_isa() noexcept;

/// Instruction set currently used by the kernels. Initialised to
/// detected_isa() at startup.
Isa active_isa() noexcept;

/// Throws emvb::Error when asking for an ISA the CPU cannot run.
void set_active_isa(Isa isa);

std::string_view to_string(Isa isa) noexcept;

/// Restores the previous active ISA on destruction.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(active_isa()) { set_active_isa(isa); }
  ~ScopedIsa() { set_active_isa(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

}  // namespace emvb::simd

// Attribute for functions compiled with AVX-512 codegen regardless of the
// global -march setting. Only call them after checking active_isa().
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
#define EMVB_HAVE_X86 1
#define EMVB_TARGET_AVX512 __attribute__((target("avx512f,avx512bw,avx512vl,avx512dq,popcnt,bmi,bmi2")))
#else
#define EMVB_HAVE_X86 0
#define EMVB_TARGET_AVX512
#endif
