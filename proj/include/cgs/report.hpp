#pragma once

#include <string>
#include <vector>

namespace cgs {

/// One named residual check. `pass` holds iff max_residual < tolerance;
/// a non-finite residual always fails.
struct Check {
  std::string name;
  std::string anchor;              // the identity being checked, in words
  std::vector<double> residuals;   // one per sample point
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

Check make_check(std::string name, std::string anchor, std::vector<double> residuals, double tolerance,
                 std::string note = {});

struct Report {
  std::vector<Check> checks;
  std::vector<std::string> warnings;

  void add(Check c) { checks.push_back(std::move(c)); }
  void append(const Report& other);
  bool passed() const;
  const Check* find(const std::string& name) const;
};

}  // namespace cgs
