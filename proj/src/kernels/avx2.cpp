#include "cgs/kernels/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define CGS_HAVE_AVX2_KERNEL 1
#include <immintrin.h>
#endif

#ifdef CGS_HAVE_AVX2_KERNEL

#include <cmath>

#include "cgs/detail/ops.hpp"

namespace cgs::kernels {

namespace {

// Lanes whose value is NaN or +-inf.
__attribute__((target("avx2"))) inline int nonfinite_mask(__m256d r) {
  const __m256d d = _mm256_sub_pd(r, r);
  return _mm256_movemask_pd(_mm256_cmp_pd(d, d, _CMP_UNORD_Q));
}

__attribute__((target("avx2"))) inline void note(std::size_t& bad, std::size_t base, int mask) {
  if (mask != 0 && bad == kOk) bad = base + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
}

std::size_t tail_unary(Op op, const double* a, double* out, std::size_t i, std::size_t n, std::size_t bad) {
  for (; i < n; ++i) {
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

std::size_t tail_binary(Op op, const double* a, const double* b, double* out, std::size_t i, std::size_t n,
                        std::size_t bad) {
  for (; i < n; ++i) {
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

__attribute__((target("avx2"))) std::size_t avx2_unary(Op op, const double* a, double* out, std::size_t n) {
  if (op != Op::Neg && op != Op::Sqrt) return tail_unary(op, a, out, 0, n, kOk);
  std::size_t bad = kOk;
  std::size_t i = 0;
  const __m256d zero = _mm256_setzero_pd();
  const __m256d sign = _mm256_set1_pd(-0.0);
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(a + i);
    __m256d r;
    if (op == Op::Neg) {
      r = _mm256_xor_pd(x, sign);
    } else {
      note(bad, i, _mm256_movemask_pd(_mm256_cmp_pd(x, zero, _CMP_LT_OQ)));
      r = _mm256_sqrt_pd(x);
    }
    note(bad, i, nonfinite_mask(r));
    _mm256_storeu_pd(out + i, r);
  }
  return tail_unary(op, a, out, i, n, bad);
}

__attribute__((target("avx2"))) std::size_t avx2_binary(Op op, const double* a, const double* b, double* out,
                                                        std::size_t n) {
  if (op != Op::Add && op != Op::Sub && op != Op::Mul && op != Op::Div) {
    return tail_binary(op, a, b, out, 0, n, kOk);
  }
  std::size_t bad = kOk;
  std::size_t i = 0;
  const __m256d zero = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(a + i);
    const __m256d y = _mm256_loadu_pd(b + i);
    __m256d r;
    switch (op) {
      case Op::Add:
        r = _mm256_add_pd(x, y);
        break;
      case Op::Sub:
        r = _mm256_sub_pd(x, y);
        break;
      case Op::Mul:
        r = _mm256_mul_pd(x, y);
        break;
      default:
        note(bad, i, _mm256_movemask_pd(_mm256_cmp_pd(y, zero, _CMP_EQ_OQ)));
        r = _mm256_div_pd(x, y);
        break;
    }
    note(bad, i, nonfinite_mask(r));
    _mm256_storeu_pd(out + i, r);
  }
  return tail_binary(op, a, b, out, i, n, bad);
}

constexpr KernelTable kAvx2{Isa::Avx2, "avx2", &avx2_unary, &avx2_binary};

}  // namespace

const KernelTable* avx2() { return &kAvx2; }

}  // namespace cgs::kernels

#else

namespace cgs::kernels {
const KernelTable* avx2() { return nullptr; }
}  // namespace cgs::kernels

#endif
