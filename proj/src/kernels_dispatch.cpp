#include <cstdlib>
#include <cstring>

#include "misreport/kernels.hpp"

namespace misreport {

const KernelTable* avx2_kernels_compiled();

const KernelTable* avx2_kernels() {
#if defined(__x86_64__) || defined(__i386__)
  if (!__builtin_cpu_supports("avx2")) return nullptr;
  return avx2_kernels_compiled();
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("MISREPORT_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return &scalar_kernels();
    const KernelTable* v = avx2_kernels();
    return v ? v : &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace misreport
