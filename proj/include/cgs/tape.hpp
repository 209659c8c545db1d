#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cgs/expr.hpp"
#include "cgs/kernels/kernels.hpp"

namespace cgs {

/// Several expressions compiled into one straight-line program over a fixed,
/// ordered list of input variables. Shared subtrees are computed once.
///
/// Batch evaluation runs each instruction across all points with the
/// selected kernel variant; the result does not depend on the variant.
class Tape {
 public:
  Tape() = default;
  Tape(std::span<const Expr> outputs, std::vector<std::string> inputs);

  std::size_t num_inputs() const noexcept { return inputs_.size(); }
  std::size_t num_outputs() const noexcept { return outputs_.size(); }
  std::size_t num_instructions() const noexcept { return code_.size(); }
  const std::vector<std::string>& inputs() const noexcept { return inputs_; }

  /// One point: `x` has num_inputs() entries, `out` num_outputs().
  void eval(std::span<const double> x, std::span<double> out) const;
  std::vector<double> eval(std::span<const double> x) const;

  /// `count` points in point-major layout: x[j * num_inputs() + i] is input
  /// i of point j; out[j * num_outputs() + o] receives output o.
  void eval_batch(std::span<const double> x, std::size_t count, std::span<double> out,
                  const kernels::KernelTable& kernel = kernels::active()) const;

 private:
  struct Instr {
    Op op;
    std::uint32_t dst;
    std::uint32_t a;
    std::uint32_t b;
  };

  [[noreturn]] void raise(std::size_t instr, std::size_t point) const;

  std::vector<std::string> inputs_;
  std::vector<double> constants_;      // registers [num_inputs, num_inputs + constants)
  std::vector<Instr> code_;
  std::vector<Expr> sources_;          // node that produced each instruction
  std::vector<std::uint32_t> outputs_;
  std::uint32_t num_registers_ = 0;
};

}  // namespace cgs
