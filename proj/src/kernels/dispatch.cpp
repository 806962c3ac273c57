#include <atomic>
#include <cstdlib>
#include <string>

#include "radsurvey/kernels/inverse_square.hpp"

namespace radsurvey::kernels {

namespace {

bool detect_avx2() noexcept {
#if defined(RADSURVEY_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() noexcept {
  if (const char* env = std::getenv("RADSURVEY_ISA")) {
    if (std::string(env) == "scalar") return Isa::Scalar;
  }
  return detect_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool avx2_supported() noexcept {
  static const bool supported = detect_avx2();
  return supported;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) noexcept {
  if (isa == Isa::Avx2 && !avx2_supported()) isa = Isa::Scalar;
  current().store(isa, std::memory_order_relaxed);
}

void inverse_square_sum(const SampleView& samples, std::span<const SourceTerm> sources, std::span<double> out) {
  if (active_isa() == Isa::Avx2) return avx2::inverse_square_sum(samples, sources, out);
  scalar::inverse_square_sum(samples, sources, out);
}

NormalEquations normal_equations(const SampleView& samples, std::span<const double> counts,
                                 std::span<const SourceTerm> sources) {
  if (active_isa() == Isa::Avx2) return avx2::normal_equations(samples, counts, sources);
  return scalar::normal_equations(samples, counts, sources);
}

}  // namespace radsurvey::kernels
