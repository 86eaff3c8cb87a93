#include <cstdlib>
#include <string_view>

#include "fraisse/errors.hpp"
#include "fraisse/kernels.hpp"

namespace fraisse::kernels {

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
  if (isa == Isa::Scalar) return true;
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detected_isa() {
  static const Isa isa = isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
  return isa;
}

Isa active_isa() {
  static const Isa isa = [] {
    const char* env = std::getenv("FRAISSE_SIMD");
    if (env && std::string_view(env) == "scalar") return Isa::Scalar;
    return detected_isa();
  }();
  return isa;
}

namespace {

Isa checked(Isa isa) {
  if (!isa_supported(isa)) throw PreconditionError("kernel ISA not supported on this CPU");
  return isa;
}

}  // namespace

void lower_tri_apply(std::span<const double> lower, std::size_t n, std::span<const double> z,
                     std::span<double> out, Isa isa) {
  if (lower.size() != n * n || (n != 0 && z.size() % n != 0) || out.size() != z.size())
    throw PreconditionError("lower_tri_apply: shape mismatch");
  const std::size_t rows = n == 0 ? 0 : z.size() / n;
  if (checked(isa) == Isa::Avx2)
    avx2::lower_tri_apply(lower.data(), n, z.data(), rows, out.data());
  else
    scalar::lower_tri_apply(lower.data(), n, z.data(), rows, out.data());
}

void pairwise_sq_dist(std::span<const double> a, std::size_t na, std::span<const double> b,
                      std::size_t nb, std::size_t d, std::span<double> out, Isa isa) {
  if (a.size() != na * d || b.size() != nb * d || out.size() != na * nb)
    throw PreconditionError("pairwise_sq_dist: shape mismatch");
  if (checked(isa) == Isa::Avx2)
    avx2::pairwise_sq_dist(a.data(), na, b.data(), nb, d, out.data());
  else
    scalar::pairwise_sq_dist(a.data(), na, b.data(), nb, d, out.data());
}

void gram_rows(std::span<const double> a, std::size_t na, std::size_t d, std::span<double> out,
               Isa isa) {
  if (a.size() != na * d || out.size() != na * na)
    throw PreconditionError("gram_rows: shape mismatch");
  if (checked(isa) == Isa::Avx2)
    avx2::gram_rows(a.data(), na, d, out.data());
  else
    scalar::gram_rows(a.data(), na, d, out.data());
}

}  // namespace fraisse::kernels
