#include "cgs/tape.hpp"

#include <bit>
#include <unordered_map>

namespace cgs {

namespace {

class Compiler {
 public:
  explicit Compiler(const std::vector<std::string>& inputs) {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      slot_of_input_.emplace(inputs[i], static_cast<std::uint32_t>(i));
    }
    num_inputs_ = static_cast<std::uint32_t>(inputs.size());
  }

  std::uint32_t visit(const Expr& e) {
    if (auto it = memo_.find(e.node_id()); it != memo_.end()) return it->second;
    std::uint32_t slot = 0;
    switch (e.op()) {
      case Op::Const:
        slot = constant(e.value());
        break;
      case Op::Var: {
        auto it = slot_of_input_.find(e.name());
        if (it == slot_of_input_.end()) throw UnboundVariable(e.name());
        slot = it->second;
        break;
      }
      default: {
        const std::uint32_t a = visit(e.arg(0));
        const std::uint32_t b = is_binary(e.op()) ? visit(e.arg(1)) : a;
        slot = static_cast<std::uint32_t>(temps_.size());
        temps_.push_back({e.op(), slot, a, b});
        sources_.push_back(e);
        slot |= kTempBit;
        break;
      }
    }
    memo_.emplace(e.node_id(), slot);
    return slot;
  }

  std::uint32_t constant(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    if (auto it = const_slots_.find(bits); it != const_slots_.end()) return it->second;
    const auto slot = num_inputs_ + static_cast<std::uint32_t>(constants_.size());
    constants_.push_back(v);
    const_slots_.emplace(bits, slot);
    return slot;
  }

  // Temporaries are numbered after inputs and constants once both are known.
  std::uint32_t resolve(std::uint32_t slot) const {
    if ((slot & kTempBit) == 0) return slot;
    return num_inputs_ + static_cast<std::uint32_t>(constants_.size()) + (slot & ~kTempBit);
  }

  static constexpr std::uint32_t kTempBit = 0x80000000u;

  std::uint32_t num_inputs_ = 0;
  std::unordered_map<std::string, std::uint32_t> slot_of_input_;
  std::unordered_map<const void*, std::uint32_t> memo_;
  std::unordered_map<std::uint64_t, std::uint32_t> const_slots_;
  std::vector<double> constants_;
  struct Pending {
    Op op;
    std::uint32_t dst, a, b;
  };
  std::vector<Pending> temps_;
  std::vector<Expr> sources_;
};

}  // namespace

Tape::Tape(std::span<const Expr> outputs, std::vector<std::string> inputs) : inputs_(std::move(inputs)) {
  Compiler c(inputs_);
  std::vector<std::uint32_t> raw_outputs;
  raw_outputs.reserve(outputs.size());
  for (const Expr& e : outputs) raw_outputs.push_back(c.visit(e));

  constants_ = c.constants_;
  for (const auto& t : c.temps_) {
    code_.push_back({t.op, c.resolve(t.dst | Compiler::kTempBit), c.resolve(t.a), c.resolve(t.b)});
  }
  sources_ = std::move(c.sources_);
  for (auto s : raw_outputs) outputs_.push_back(c.resolve(s));
  num_registers_ = static_cast<std::uint32_t>(inputs_.size() + constants_.size() + code_.size());
}

void Tape::raise(std::size_t instr, std::size_t point) const {
  const Expr& node = sources_[instr];
  throw DomainError("domain error in '" + std::string(op_name(node.op())) + "' node: " + to_string(node) +
                    " (point " + std::to_string(point) + ")");
}

void Tape::eval(std::span<const double> x, std::span<double> out) const {
  if (x.size() != inputs_.size() || out.size() != outputs_.size()) {
    throw DimensionError("tape evaluation: argument size mismatch");
  }
  eval_batch(x, 1, out, kernels::scalar());
}

std::vector<double> Tape::eval(std::span<const double> x) const {
  std::vector<double> out(outputs_.size());
  eval(x, out);
  return out;
}

void Tape::eval_batch(std::span<const double> x, std::size_t count, std::span<double> out,
                      const kernels::KernelTable& kernel) const {
  const std::size_t ni = inputs_.size();
  const std::size_t no = outputs_.size();
  if (x.size() != ni * count || out.size() != no * count) {
    throw DimensionError("tape batch evaluation: argument size mismatch");
  }
  if (count == 0) return;

  // Register-major scratch so each instruction streams over contiguous lanes.
  std::vector<double> regs(static_cast<std::size_t>(num_registers_) * count);
  auto reg = [&](std::uint32_t r) { return regs.data() + static_cast<std::size_t>(r) * count; };
  for (std::size_t i = 0; i < ni; ++i) {
    double* dst = reg(static_cast<std::uint32_t>(i));
    for (std::size_t j = 0; j < count; ++j) dst[j] = x[j * ni + i];
  }
  for (std::size_t c = 0; c < constants_.size(); ++c) {
    double* dst = reg(static_cast<std::uint32_t>(ni + c));
    for (std::size_t j = 0; j < count; ++j) dst[j] = constants_[c];
  }
  for (std::size_t k = 0; k < code_.size(); ++k) {
    const Instr& in = code_[k];
    const std::size_t bad = is_binary(in.op) ? kernel.binary(in.op, reg(in.a), reg(in.b), reg(in.dst), count)
                                             : kernel.unary(in.op, reg(in.a), reg(in.dst), count);
    if (bad != kernels::kOk) raise(k, bad);
  }
  for (std::size_t o = 0; o < no; ++o) {
    const double* src = reg(outputs_[o]);
    for (std::size_t j = 0; j < count; ++j) out[j * no + o] = src[j];
  }
}

}  // namespace cgs
