#include "cgs/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cgs {

Check make_check(std::string name, std::string anchor, std::vector<double> residuals, double tolerance,
                 std::string note) {
  Check c;
  c.name = std::move(name);
  c.anchor = std::move(anchor);
  c.tolerance = tolerance;
  c.note = std::move(note);
  double worst = 0.0;
  for (double r : residuals) {
    if (!std::isfinite(r)) {
      worst = std::numeric_limits<double>::infinity();
      break;
    }
    worst = std::max(worst, std::abs(r));
  }
  c.residuals = std::move(residuals);
  c.max_residual = worst;
  c.pass = std::isfinite(worst) && worst < tolerance;
  return c;
}

void Report::append(const Report& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
}

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check* Report::find(const std::string& name) const {
  for (const Check& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

}  // namespace cgs
