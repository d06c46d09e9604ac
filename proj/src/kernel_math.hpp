#pragma once

// Lane-width transcendentals for the batched kernel. glibc's libmvec provides
// AVX-512 variants of erf/exp/sin/cos (<= 4 ulp); the scalar fallback keeps
// other toolchains working. Either path is deterministic for a given build.

#include <cmath>

#if defined(__AVX512F__) && defined(__GLIBC__) && !defined(GBPINN_NO_VECMATH)
#define GBPINN_VECMATH 1
#include <immintrin.h>
extern "C" {
__m512d _ZGVeN8v_sin(__m512d);
__m512d _ZGVeN8v_cos(__m512d);
__m512d _ZGVeN8v_exp(__m512d);
__m512d _ZGVeN8v_erf(__m512d);
}
#endif

namespace gbpinn::detail {

#if defined(GBPINN_VECMATH)

inline void vsin8(const double* in, double* out) {
  _mm512_storeu_pd(out, _ZGVeN8v_sin(_mm512_loadu_pd(in)));
}
inline void vcos8(const double* in, double* out) {
  _mm512_storeu_pd(out, _ZGVeN8v_cos(_mm512_loadu_pd(in)));
}
inline void vexp8(const double* in, double* out) {
  _mm512_storeu_pd(out, _ZGVeN8v_exp(_mm512_loadu_pd(in)));
}
inline void verf8(const double* in, double* out) {
  _mm512_storeu_pd(out, _ZGVeN8v_erf(_mm512_loadu_pd(in)));
}

#else

inline void vsin8(const double* in, double* out) {
  for (int l = 0; l < 8; ++l) out[l] = std::sin(in[l]);
}
inline void vcos8(const double* in, double* out) {
  for (int l = 0; l < 8; ++l) out[l] = std::cos(in[l]);
}
inline void vexp8(const double* in, double* out) {
  for (int l = 0; l < 8; ++l) out[l] = std::exp(in[l]);
}
inline void verf8(const double* in, double* out) {
  for (int l = 0; l < 8; ++l) out[l] = std::erf(in[l]);
}

#endif

// One lane block as a GNU vector (GCC/Clang); the compiler splits it into
// whatever register width the target prefers. The reduced alignment plus
// may_alias make direct loads/stores legal on unaligned workspace rows.
typedef double v8df
    __attribute__((vector_size(64), aligned(8), may_alias));

inline v8df vsplat8(double x) { return v8df{x, x, x, x, x, x, x, x}; }
inline v8df vload8(const double* p) {
  return *reinterpret_cast<const v8df*>(p);
}
inline void vstore8(double* p, v8df x) { *reinterpret_cast<v8df*>(p) = x; }

// Fixed-tree horizontal sum; the reduction order never depends on data.
inline double hsum8(const double* s) {
  const double s01 = s[0] + s[1];
  const double s23 = s[2] + s[3];
  const double s45 = s[4] + s[5];
  const double s67 = s[6] + s[7];
  return (s01 + s23) + (s45 + s67);
}

}  // namespace gbpinn::detail
