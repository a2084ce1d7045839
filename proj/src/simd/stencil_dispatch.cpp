#include <atomic>
#include <cstdlib>
#include <string>

#include "korteweg/simd/stencil.hpp"

namespace korteweg::simd {
namespace {

constexpr int kAuto = -1;
std::atomic<int> forced{kAuto};

Isa detect() {
  if (const char* env = std::getenv("KORTEWEG_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
  }
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

}  // namespace

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(KORTEWEG_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() {
  const int f = forced.load(std::memory_order_relaxed);
  if (f != kAuto) return static_cast<Isa>(f);
  static const Isa detected = detect();
  return detected;
}

void force_isa(std::optional<Isa> isa) {
  forced.store(isa ? static_cast<int>(*isa) : kAuto, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void correlate(PaddedView in, int nx, int ny, Stencil st, double* out) {
#if defined(KORTEWEG_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return detail::correlate_avx2(in, nx, ny, st, out);
#endif
  detail::correlate_scalar(in, nx, ny, st, out);
}

void pair_energy(PaddedView g, PaddedView m, int nx, int ny, Stencil st, double* out) {
#if defined(KORTEWEG_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return detail::pair_energy_avx2(g, m, nx, ny, st, out);
#endif
  detail::pair_energy_scalar(g, m, nx, ny, st, out);
}

}  // namespace korteweg::simd
