#pragma once

#include <cstddef>
#include <limits>

#include "cgs/expr.hpp"

// Elementwise kernels that execute one tape instruction over a batch of
// points. Every variant must produce results bit-identical to the scalar
// reference: IEEE add/sub/mul/div/sqrt are exact in both, and the
// transcendental ops fall back to per-lane libm calls.
namespace cgs::kernels {

inline constexpr std::size_t kOk = std::numeric_limits<std::size_t>::max();

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  const char* name;
  // Return kOk, or the index of the first lane whose input is outside the
  // op's domain or whose result is not finite.
  std::size_t (*unary)(Op op, const double* a, double* out, std::size_t n);
  std::size_t (*binary)(Op op, const double* a, const double* b, double* out, std::size_t n);
};

const KernelTable& scalar();
// nullptr when the variant is not compiled for this target.
const KernelTable* avx2();
const KernelTable* neon();

bool cpu_has_avx2() noexcept;

// Best variant supported by the running CPU. Setting the environment
// variable CGS_KERNEL=scalar forces the reference path.
const KernelTable& active();

}  // namespace cgs::kernels
