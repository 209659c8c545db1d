#include "cgs/kernels/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#define CGS_HAVE_NEON_KERNEL 1
#include <arm_neon.h>
#endif

#ifdef CGS_HAVE_NEON_KERNEL

#include <cmath>

#include "cgs/detail/ops.hpp"

namespace cgs::kernels {

namespace {

inline unsigned lane_mask(uint64x2_t m) {
  return (vgetq_lane_u64(m, 0) != 0 ? 1u : 0u) | (vgetq_lane_u64(m, 1) != 0 ? 2u : 0u);
}

inline unsigned nonfinite_mask(float64x2_t r) {
  const float64x2_t d = vsubq_f64(r, r);
  // NaN compares unequal to itself.
  return lane_mask(veorq_u64(vceqq_f64(d, d), vdupq_n_u64(~0ull)));
}

inline void note(std::size_t& bad, std::size_t base, unsigned mask) {
  if (mask != 0 && bad == kOk) bad = base + static_cast<std::size_t>(__builtin_ctz(mask));
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

std::size_t neon_unary(Op op, const double* a, double* out, std::size_t n) {
  if (op != Op::Neg && op != Op::Sqrt) return tail_unary(op, a, out, 0, n, kOk);
  std::size_t bad = kOk;
  std::size_t i = 0;
  const float64x2_t zero = vdupq_n_f64(0.0);
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(a + i);
    float64x2_t r;
    if (op == Op::Neg) {
      r = vnegq_f64(x);
    } else {
      note(bad, i, lane_mask(vcltq_f64(x, zero)));
      r = vsqrtq_f64(x);
    }
    note(bad, i, nonfinite_mask(r));
    vst1q_f64(out + i, r);
  }
  return tail_unary(op, a, out, i, n, bad);
}

std::size_t neon_binary(Op op, const double* a, const double* b, double* out, std::size_t n) {
  if (op != Op::Add && op != Op::Sub && op != Op::Mul && op != Op::Div) {
    return tail_binary(op, a, b, out, 0, n, kOk);
  }
  std::size_t bad = kOk;
  std::size_t i = 0;
  const float64x2_t zero = vdupq_n_f64(0.0);
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(a + i);
    const float64x2_t y = vld1q_f64(b + i);
    float64x2_t r;
    switch (op) {
      case Op::Add:
        r = vaddq_f64(x, y);
        break;
      case Op::Sub:
        r = vsubq_f64(x, y);
        break;
      case Op::Mul:
        r = vmulq_f64(x, y);
        break;
      default:
        note(bad, i, lane_mask(vceqq_f64(y, zero)));
        r = vdivq_f64(x, y);
        break;
    }
    note(bad, i, nonfinite_mask(r));
    vst1q_f64(out + i, r);
  }
  return tail_binary(op, a, b, out, i, n, bad);
}

constexpr KernelTable kNeon{Isa::Neon, "neon", &neon_unary, &neon_binary};

}  // namespace

const KernelTable* neon() { return &kNeon; }

}  // namespace cgs::kernels

#else

namespace cgs::kernels {
const KernelTable* neon() { return nullptr; }
}  // namespace cgs::kernels

#endif
