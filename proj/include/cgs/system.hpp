#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cgs/geometry.hpp"

namespace cgs {

/// Fields xi_1..xi_k and gradient components u_1..u_k on one chart, with
/// optional domain constraints (each expression must be > 0).
struct GradientSystem {
  ChartPtr chart;
  std::vector<VectorField> xi;
  std::vector<Expr> u;
  std::vector<Expr> domain;

  int k() const noexcept { return static_cast<int>(xi.size()); }
  /// CR dimension n = N - k.
  int n() const noexcept { return chart->complex_dim() - k(); }

  void validate() const;
  /// False when a constraint is not positive or cannot be evaluated.
  bool in_domain(const Point& p) const;

  std::vector<VectorField> j_fields() const;

  /// The same system written in a new basis of the parameter space:
  /// xi'_a = sum_b B(b, a) xi_b and u' = B^{-1} u.
  GradientSystem rebased(const Eigen::MatrixXd& b) const;
};

struct SampleConfig {
  std::uint64_t seed = 1;
  int points = 100;
  double box = 2.0;                  // coordinates uniform in [-box, box]
  std::vector<Expr> extra_domain;    // additional constraints (> 0)
};

/// Seeded uniform samples filtered by the domain; stops after
/// 100 * points attempts. Throws NumericalError when nothing is accepted.
std::vector<Point> sample_points(const GradientSystem& sys, const SampleConfig& cfg);

}  // namespace cgs
