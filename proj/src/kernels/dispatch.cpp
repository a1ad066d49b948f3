#include <atomic>
#include <cstdlib>
#include <cstring>

#include "glmebic/kernels.hpp"

namespace glmebic::kernels {
namespace {

constexpr KernelTable kScalarTable{Backend::Scalar, detail::dot_scalar,
                                   detail::weighted_dot_scalar, detail::axpy_scalar,
                                   detail::weighted_gram_scalar};

const KernelTable* detect_simd() noexcept {
#if defined(GLMEBIC_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return &detail::avx2_table();
  }
  return nullptr;
#elif defined(GLMEBIC_HAVE_NEON)
  return &detail::neon_table();
#else
  return nullptr;
#endif
}

const KernelTable* initial_table() noexcept {
  const char* env = std::getenv("GLMEBIC_KERNELS");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return &kScalarTable;
  const KernelTable* simd = detect_simd();
  return simd != nullptr ? simd : &kScalarTable;
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view to_string(Backend backend) noexcept {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_table() noexcept { return kScalarTable; }

const KernelTable* simd_table() noexcept {
  static const KernelTable* table = detect_simd();
  return table;
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

bool use_backend(Backend backend) noexcept {
  if (backend == Backend::Scalar) {
    current().store(&kScalarTable);
    return true;
  }
  const KernelTable* simd = simd_table();
  if (simd == nullptr || simd->backend != backend) return false;
  current().store(simd);
  return true;
}

}  // namespace glmebic::kernels
