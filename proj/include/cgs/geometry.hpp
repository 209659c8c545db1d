#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cgs/expr.hpp"

namespace cgs {

/// A single holomorphic chart of complex dimension N. Real coordinates are
/// ordered x_1, y_1, ..., x_N, y_N with z_mu = x_mu + i y_mu.
class ComplexChart {
 public:
  explicit ComplexChart(int complex_dim);
  explicit ComplexChart(std::vector<std::string> names);

  int complex_dim() const noexcept { return static_cast<int>(names_.size() / 2); }
  int real_dim() const noexcept { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& x_name(int mu) const { return names_.at(static_cast<std::size_t>(2 * mu)); }
  const std::string& y_name(int mu) const { return names_.at(static_cast<std::size_t>(2 * mu + 1)); }
  std::optional<int> index_of(std::string_view name) const;

  bool operator==(const ComplexChart&) const = default;

 private:
  std::vector<std::string> names_;
};

using ChartPtr = std::shared_ptr<const ComplexChart>;

/// A point of the chart; entries follow the chart's coordinate order.
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> coords);
  explicit Point(const Eigen::VectorXd& coords);

  std::size_t size() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }
  Eigen::VectorXd vector() const;

 private:
  std::vector<double> coords_;
};

/// Real vector field sum_i V^i d/dcoord_i with symbolic components.
class VectorField {
 public:
  VectorField(ChartPtr chart, std::vector<Expr> components);

  static VectorField zero(ChartPtr chart);
  /// d/dcoord_index.
  static VectorField coordinate(ChartPtr chart, int index);

  const ChartPtr& chart() const noexcept { return chart_; }
  const std::vector<Expr>& components() const noexcept { return components_; }
  const Expr& operator[](std::size_t i) const { return components_[i]; }
  std::size_t size() const noexcept { return components_.size(); }

  Eigen::VectorXd at(const Point& p) const;

  VectorField operator+(const VectorField& other) const;
  VectorField operator-(const VectorField& other) const;
  VectorField operator-() const;
  /// Multiplication by a function.
  VectorField scaled(const Expr& f) const;

 private:
  ChartPtr chart_;
  std::vector<Expr> components_;
};

/// Type-(1,0) field sum_mu a_mu d/dz_mu, stored as real and imaginary parts
/// of each coefficient a_mu.
struct ComplexField {
  ChartPtr chart;
  std::vector<Expr> re;
  std::vector<Expr> im;
};

// --- evaluation helpers --------------------------------------------------

/// Values of `exprs` at each point; row j holds point j.
Eigen::MatrixXd evaluate_at(std::span<const Expr> exprs, const ComplexChart& chart, std::span<const Point> pts);
double evaluate_at(const Expr& e, const ComplexChart& chart, const Point& p);

/// Column matrix [V_1(p) ... V_m(p)].
Eigen::MatrixXd field_values(std::span<const VectorField> fields, const Point& p);

// --- calculus --------------------------------------------------------------

/// J d/dx_mu = d/dy_mu, J d/dy_mu = -d/dx_mu.
VectorField apply_J(const VectorField& v);

/// Symbolic V(f) = sum_i V^i df/dcoord_i.
Expr derivative_along(const VectorField& v, const Expr& f);
/// Symbolic d^c f(V), expanded directly from the coordinate form of J.
Expr dc_expr(const Expr& f, const VectorField& v);

double d_apply(const Expr& f, const VectorField& v, const Point& p);
double dc_apply(const Expr& f, const VectorField& v, const Point& p);

VectorField lie_bracket(const VectorField& v, const VectorField& w);

/// dd^c f(V, W) = V(d^c f(W)) - W(d^c f(V)) - d^c f([V, W]).
Expr ddc_expr(const Expr& f, const VectorField& v, const VectorField& w);
double ddc_apply(const Expr& f, const VectorField& v, const VectorField& w, const Point& p);

/// Sum of second derivatives over all real coordinates.
Expr laplacian(const Expr& f, const ComplexChart& chart);

/// rho^c(V) = 1/2 (V - i J V) written as sum a_mu d/dz_mu, so that
/// a_mu = V^{x_mu} + i V^{y_mu}.
ComplexField complexify(const VectorField& v);
/// Inverse of complexify: the real field 2 Re(Z).
VectorField realify(const ComplexField& z);

/// d a_mu / d zbar_nu = 1/2 (d/dx_nu + i d/dy_nu) a_mu for all mu, nu, as
/// (re, im) expression pairs.
std::vector<std::pair<Expr, Expr>> antiholomorphic_derivatives(const ComplexField& z);

struct HolomorphyResult {
  bool holomorphic = false;
  double max_residual = 0.0;
};
HolomorphyResult is_holomorphic(const ComplexField& z, std::span<const Point> pts, double tol);

/// Numerical rank of the 2N x m matrix of field values.
int distribution_rank(std::span<const VectorField> fields, const Point& p);

/// Largest norm of a pairwise bracket's component orthogonal to the span of
/// the fields at p. Throws NumericalError when the fields are dependent at p.
double frobenius_defect(std::span<const VectorField> fields, const Point& p);

}  // namespace cgs
