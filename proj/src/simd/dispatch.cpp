#include "latentdem/simd.hpp"

#include "kernels_impl.hpp"

#include <cstdlib>
#include <cstring>

namespace latentdem::simd {
namespace {

const KernelTable kScalar{Isa::scalar,           scalar::dot,        scalar::squared_distance,
                          scalar::axpy,          scalar::spectral_product, scalar::hqs_update};

#if defined(LATENTDEM_HAVE_AVX2)
const KernelTable kAvx2{Isa::avx2,           avx2::dot,        avx2::squared_distance,
                        avx2::axpy,          avx2::spectral_product, avx2::hqs_update};

bool cpu_has_avx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
}
#endif

const KernelTable& select() {
  const char* env = std::getenv("LATENTDEM_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return kScalar;
  if (const KernelTable* t = avx2_kernels()) return *t;
  return kScalar;
}

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

const KernelTable* avx2_kernels() {
#if defined(LATENTDEM_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace latentdem::simd
