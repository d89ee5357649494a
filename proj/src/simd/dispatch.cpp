#include <atomic>
#include <cstdlib>
#include <string>

#include "lis/error.hpp"
#include "lis/simd.hpp"

namespace lis::simd {

namespace {

constexpr Kernels kScalar{Backend::scalar, scalar::pair_sums, scalar::cross_moments,
                          scalar::residual_sums, scalar::augmented_mse};

#if defined(LIS_HAVE_AVX2_TU)
constexpr Kernels kAvx2{Backend::avx2, avx2::pair_sums, avx2::cross_moments,
                        avx2::residual_sums, avx2::augmented_mse};
#endif

#if defined(LIS_HAVE_NEON_TU)
constexpr Kernels kNeon{Backend::neon, neon::pair_sums, neon::cross_moments,
                        neon::residual_sums, neon::augmented_mse};
#endif

bool cpu_has_avx2() {
#if defined(LIS_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Kernels* initial_selection() {
  if (const char* env = std::getenv("LIS_SIMD"); env != nullptr && *env != '\0') {
    const std::string want(env);
    for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
      if (want == to_string(b)) {
        if (const Kernels* k = kernels_for(b)) return k;
      }
    }
  }
  return kernels_for(best_backend());
}

std::atomic<const Kernels*>& active() {
  static std::atomic<const Kernels*> ptr{initial_selection()};
  return ptr;
}

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "?";
}

const Kernels* kernels_for(Backend b) {
  switch (b) {
    case Backend::scalar:
      return &kScalar;
    case Backend::avx2:
#if defined(LIS_HAVE_AVX2_TU)
      if (cpu_has_avx2()) return &kAvx2;
#endif
      return nullptr;
    case Backend::neon:
#if defined(LIS_HAVE_NEON_TU)
      return &kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Backend best_backend() {
  if (kernels_for(Backend::avx2)) return Backend::avx2;
  if (kernels_for(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
    if (kernels_for(b)) out.push_back(b);
  }
  return out;
}

const Kernels& kernels() { return *active().load(std::memory_order_acquire); }

void select_backend(Backend b) {
  const Kernels* k = kernels_for(b);
  if (!k) {
    throw ConfigError("SIMD backend '" + std::string(to_string(b)) +
                      "' is not available on this build or CPU");
  }
  active().store(k, std::memory_order_release);
}

}  // namespace lis::simd
