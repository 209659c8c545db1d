#include <cmath>
#include <cstdlib>
#include <string_view>

#include "cgs/detail/ops.hpp"
#include "cgs/kernels/kernels.hpp"

namespace cgs::kernels {

namespace {

std::size_t scalar_unary(Op op, const double* a, double* out, std::size_t n) {
  std::size_t bad = kOk;
  for (std::size_t i = 0; i < n; ++i) {
    if (!detail::domain_ok(op, a[i], 0.0)) {
      if (bad == kOk) bad = i;
      out[i] = 0.0;
      continue;
    }
    out[i] = detail::apply_unary(op, a[i]);
    if (bad == kOk && !std::isfinite(out[i])) bad = i;
  }
  return bad;
}

std::size_t scalar_binary(Op op, const double* a, const double* b, double* out, std::size_t n) {
  std::size_t bad = kOk;
  for (std::size_t i = 0; i < n; ++i) {
    if (!detail::domain_ok(op, a[i], b[i])) {
      if (bad == kOk) bad = i;
      out[i] = 0.0;
      continue;
    }
    out[i] = detail::apply_binary(op, a[i], b[i]);
    if (bad == kOk && !std::isfinite(out[i])) bad = i;
  }
  return bad;
}

constexpr KernelTable kScalar{Isa::Scalar, "scalar", &scalar_unary, &scalar_binary};

}  // namespace

const KernelTable& scalar() { return kScalar; }

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& active() {
  static const KernelTable* chosen = [] {
    const char* forced = std::getenv("CGS_KERNEL");
    if (forced != nullptr && std::string_view(forced) == "scalar") return &kScalar;
    if (const KernelTable* k = avx2(); k != nullptr && cpu_has_avx2()) return k;
    if (const KernelTable* k = neon(); k != nullptr) return k;
    return &kScalar;
  }();
  return *chosen;
}

}  // namespace cgs::kernels
