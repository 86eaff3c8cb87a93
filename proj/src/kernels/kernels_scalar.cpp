#include "fraisse/kernels.hpp"

namespace fraisse::kernels::scalar {

void lower_tri_apply(const double* lower, std::size_t n, const double* z, std::size_t rows,
                     double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* zr = z + r * n;
    double* yr = out + r * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double* li = lower + i * n;
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += li[j] * zr[j];
      yr[i] = acc;
    }
  }
}

void pairwise_sq_dist(const double* a, std::size_t na, const double* b, std::size_t nb,
                      std::size_t d, double* out) {
  for (std::size_t i = 0; i < na; ++i) {
    const double* ai = a + i * d;
    for (std::size_t j = 0; j < nb; ++j) {
      const double* bj = b + j * d;
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = ai[k] - bj[k];
        acc += diff * diff;
      }
      out[i * nb + j] = acc;
    }
  }
}

void gram_rows(const double* a, std::size_t na, std::size_t d, double* out) {
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < na; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += a[i * d + k] * a[j * d + k];
      out[i * na + j] = acc;
    }
}

}  // namespace fraisse::kernels::scalar
