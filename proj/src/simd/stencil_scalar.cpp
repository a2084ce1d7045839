#include <algorithm>
#include <cstddef>
#include <vector>

#include "korteweg/simd/stencil.hpp"

namespace korteweg::simd::detail {

void correlate_scalar(PaddedView in, int nx, int ny, Stencil st, double* out) {
  const int r = st.radius;
  const int width = 2 * r + 1;
  std::vector<double> acc(nx);
  for (int j = 0; j < ny; ++j) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int b = -r; b <= r; ++b) {
      const double* row = in.data + static_cast<std::ptrdiff_t>(j + in.pad + b) * in.pitch + in.pad;
      for (int a = -r; a <= r; ++a) {
        const double w = st.weights[(b + r) * width + (a + r)];
        if (w == 0.0) continue;
        const double* src = row + a;
        for (int i = 0; i < nx; ++i) acc[i] += w * src[i];
      }
    }
    std::copy(acc.begin(), acc.end(), out + static_cast<std::ptrdiff_t>(j) * nx);
  }
}

void pair_energy_scalar(PaddedView g, PaddedView m, int nx, int ny, Stencil st, double* out) {
  const int r = st.radius;
  const int width = 2 * r + 1;
  std::vector<double> acc(nx);
  for (int j = 0; j < ny; ++j) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const double* gc = g.data + static_cast<std::ptrdiff_t>(j + g.pad) * g.pitch + g.pad;
    const double* mc = m.data + static_cast<std::ptrdiff_t>(j + m.pad) * m.pitch + m.pad;
    for (int b = -r; b <= r; ++b) {
      const double* grow = gc + static_cast<std::ptrdiff_t>(b) * g.pitch;
      const double* mrow = mc + static_cast<std::ptrdiff_t>(b) * m.pitch;
      for (int a = -r; a <= r; ++a) {
        const double w = st.weights[(b + r) * width + (a + r)];
        if (w == 0.0) continue;
        const double* gn = grow + a;
        const double* mn = mrow + a;
        for (int i = 0; i < nx; ++i) {
          const double t = w * mn[i];
          const double d = gc[i] - gn[i];
          acc[i] += t * (d * d);
        }
      }
    }
    double* dst = out + static_cast<std::ptrdiff_t>(j) * nx;
    for (int i = 0; i < nx; ++i) dst[i] = mc[i] * acc[i];
  }
}

}  // namespace korteweg::simd::detail
