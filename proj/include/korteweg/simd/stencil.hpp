#pragma once

#include <optional>
#include <string_view>

namespace korteweg::simd {

enum class Isa { scalar, avx2 };

/// Square (2 radius + 1)^2 weight patch, row-major with the x offset fastest:
/// weights[(b + radius) * (2 radius + 1) + (a + radius)] belongs to offset (a, b).
struct Stencil {
  const double* weights = nullptr;
  int radius = 0;
};

/// Padded 2D array; interior cell (i, j) lives at data[(j + pad) * pitch + i + pad].
struct PaddedView {
  const double* data = nullptr;
  int pitch = 0;
  int pad = 0;
};

/// out[j * nx + i] = sum_{a,b} w(a, b) in(i + a, j + b).
/// Zero weights are skipped. The scalar and vector paths perform the same
/// multiplications and additions in the same order and agree bitwise.
void correlate(PaddedView in, int nx, int ny, Stencil st, double* out);

/// out[j * nx + i] = m(i, j) * sum_{a,b} (w(a, b) m(i+a, j+b)) ((g(i, j) - g(i+a, j+b))^2).
void pair_energy(PaddedView g, PaddedView m, int nx, int ny, Stencil st, double* out);

/// Instruction set used by the dispatching entry points. Chosen at first use
/// from CPU features; the environment variable KORTEWEG_SIMD=scalar|avx2
/// overrides it.
Isa active_isa();
bool isa_available(Isa isa);
/// Forces an instruction set (tests); std::nullopt restores auto-detection.
void force_isa(std::optional<Isa> isa);
std::string_view isa_name(Isa isa);

namespace detail {
void correlate_scalar(PaddedView in, int nx, int ny, Stencil st, double* out);
void pair_energy_scalar(PaddedView g, PaddedView m, int nx, int ny, Stencil st, double* out);
#if defined(KORTEWEG_HAVE_AVX2)
void correlate_avx2(PaddedView in, int nx, int ny, Stencil st, double* out);
void pair_energy_avx2(PaddedView g, PaddedView m, int nx, int ny, Stencil st, double* out);
#endif
}  // namespace detail

}  // namespace korteweg::simd
