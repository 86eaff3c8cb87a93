#pragma once

// Data-parallel float kernels with a scalar reference and an AVX2+FMA variant.
// The variant is picked at runtime from CPU features; FRAISSE_SIMD=scalar in
// the environment forces the reference path. Results of the two paths agree
// to within a few ulps (FMA changes rounding), never bit-for-bit by promise.

#include <cstddef>
#include <span>

namespace fraisse::kernels {

enum class Isa { Scalar, Avx2 };

const char* isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa detected_isa();
Isa active_isa();

/// out[r*n + i] = sum_{j<=i} lower[i*n + j] * z[r*n + j] for every row r.
void lower_tri_apply(std::span<const double> lower, std::size_t n, std::span<const double> z,
                     std::span<double> out, Isa isa = active_isa());

/// out[i*nb + j] = |a_i - b_j|^2 with rows of length d.
void pairwise_sq_dist(std::span<const double> a, std::size_t na, std::span<const double> b,
                      std::size_t nb, std::size_t d, std::span<double> out,
                      Isa isa = active_isa());

/// out[i*na + j] = <a_i, a_j> with rows of length d.
void gram_rows(std::span<const double> a, std::size_t na, std::size_t d, std::span<double> out,
               Isa isa = active_isa());

namespace scalar {
void lower_tri_apply(const double* lower, std::size_t n, const double* z, std::size_t rows,
                     double* out);
void pairwise_sq_dist(const double* a, std::size_t na, const double* b, std::size_t nb,
                      std::size_t d, double* out);
void gram_rows(const double* a, std::size_t na, std::size_t d, double* out);
}  // namespace scalar

namespace avx2 {
void lower_tri_apply(const double* lower, std::size_t n, const double* z, std::size_t rows,
                     double* out);
void pairwise_sq_dist(const double* a, std::size_t na, const double* b, std::size_t nb,
                      std::size_t d, double* out);
void gram_rows(const double* a, std::size_t na, std::size_t d, double* out);
}  // namespace avx2

}  // namespace fraisse::kernels
