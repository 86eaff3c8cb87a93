// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <cmath>

#include "fraisse/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define FRAISSE_HAVE_AVX2_TU 1
#endif

namespace fraisse::kernels::avx2 {

#ifdef FRAISSE_HAVE_AVX2_TU

// Four samples at a time: lane l holds sample r+l, so the inner loop over j is
// a broadcast-FMA against a strided load.
void lower_tri_apply(const double* lower, std::size_t n, const double* z, std::size_t rows,
                     double* out) {
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double* z0 = z + r * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double* li = lower + i * n;
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t j = 0; j <= i; ++j) {
        const __m256d zv = _mm256_set_pd(z0[3 * n + j], z0[2 * n + j], z0[n + j], z0[j]);
        acc = _mm256_fmadd_pd(_mm256_set1_pd(li[j]), zv, acc);
      }
      alignas(32) double lane[4];
      _mm256_store_pd(lane, acc);
      for (std::size_t l = 0; l < 4; ++l) out[(r + l) * n + i] = lane[l];
    }
  }
  // same fused operations per row as the vector lanes, so a row's value never
  // depends on where a block boundary falls
  for (; r < rows; ++r) {
    const double* zr = z + r * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double* li = lower + i * n;
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc = std::fma(li[j], zr[j], acc);
      out[r * n + i] = acc;
    }
  }
}

void pairwise_sq_dist(const double* a, std::size_t na, const double* b, std::size_t nb,
                      std::size_t d, double* out) {
  for (std::size_t i = 0; i < na; ++i) {
    const double* ai = a + i * d;
    std::size_t j = 0;
    for (; j + 4 <= nb; j += 4) {
      const double* b0 = b + j * d;
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < d; ++k) {
        const __m256d bv = _mm256_set_pd(b0[3 * d + k], b0[2 * d + k], b0[d + k], b0[k]);
        const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(ai[k]), bv);
        acc = _mm256_fmadd_pd(diff, diff, acc);
      }
      _mm256_storeu_pd(out + i * nb + j, acc);
    }
    for (; j < nb; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = ai[k] - b[j * d + k];
        acc = std::fma(diff, diff, acc);
      }
      out[i * nb + j] = acc;
    }
  }
}

void gram_rows(const double* a, std::size_t na, std::size_t d, double* out) {
  for (std::size_t i = 0; i < na; ++i) {
    const double* ai = a + i * d;
    std::size_t j = 0;
    for (; j + 4 <= na; j += 4) {
      const double* a0 = a + j * d;
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < d; ++k) {
        const __m256d av = _mm256_set_pd(a0[3 * d + k], a0[2 * d + k], a0[d + k], a0[k]);
        acc = _mm256_fmadd_pd(_mm256_set1_pd(ai[k]), av, acc);
      }
      _mm256_storeu_pd(out + i * na + j, acc);
    }
    for (; j < na; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc = std::fma(ai[k], a[j * d + k], acc);
      out[i * na + j] = acc;
    }
  }
}

#else

void lower_tri_apply(const double* lower, std::size_t n, const double* z, std::size_t rows,
                     double* out) {
  scalar::lower_tri_apply(lower, n, z, rows, out);
}
void pairwise_sq_dist(const double* a, std::size_t na, const double* b, std::size_t nb,
                      std::size_t d, double* out) {
  scalar::pairwise_sq_dist(a, na, b, nb, d, out);
}
void gram_rows(const double* a, std::size_t na, std::size_t d, double* out) {
  scalar::gram_rows(a, na, d, out);
}

#endif

}  // namespace fraisse::kernels::avx2
