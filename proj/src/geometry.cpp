#include "cgs/geometry.hpp"

#include <cmath>
#include <complex>
#include <set>

#include "cgs/linalg.hpp"
#include "cgs/tape.hpp"

namespace cgs {

// ---------------------------------------------------------------------------
// Chart, point, field

ComplexChart::ComplexChart(int complex_dim) {
  if (complex_dim < 1) throw DimensionError("chart dimension must be positive");
  for (int mu = 1; mu <= complex_dim; ++mu) {
    names_.push_back("x" + std::to_string(mu));
    names_.push_back("y" + std::to_string(mu));
  }
}

ComplexChart::ComplexChart(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty() || names_.size() % 2 != 0) {
    throw DimensionError("chart needs an even, positive number of real coordinates");
  }
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != names_.size()) throw DimensionError("chart coordinate names must be distinct");
}

std::optional<int> ComplexChart::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

Point::Point(std::vector<double> coords) : coords_(std::move(coords)) {
  for (double c : coords_) {
    if (!std::isfinite(c)) throw DomainError("point coordinates must be finite");
  }
}

Point::Point(const Eigen::VectorXd& coords) : Point(std::vector<double>(coords.data(), coords.data() + coords.size())) {}

Eigen::VectorXd Point::vector() const {
  return Eigen::Map<const Eigen::VectorXd>(coords_.data(), static_cast<Eigen::Index>(coords_.size()));
}

VectorField::VectorField(ChartPtr chart, std::vector<Expr> components)
    : chart_(std::move(chart)), components_(std::move(components)) {
  if (!chart_) throw DimensionError("vector field needs a chart");
  if (static_cast<int>(components_.size()) != chart_->real_dim()) {
    throw DimensionError("vector field has " + std::to_string(components_.size()) + " components, chart needs " +
                         std::to_string(chart_->real_dim()));
  }
  for (const Expr& c : components_) {
    for (const std::string& v : variables(c)) {
      if (!chart_->index_of(v)) throw DimensionError("component uses '" + v + "', which is not a chart coordinate");
    }
  }
}

VectorField VectorField::zero(ChartPtr chart) {
  const auto n = static_cast<std::size_t>(chart->real_dim());
  return VectorField(std::move(chart), std::vector<Expr>(n));
}

VectorField VectorField::coordinate(ChartPtr chart, int index) {
  std::vector<Expr> comps(static_cast<std::size_t>(chart->real_dim()));
  comps.at(static_cast<std::size_t>(index)) = Expr::constant(1.0);
  return VectorField(std::move(chart), std::move(comps));
}

Eigen::VectorXd VectorField::at(const Point& p) const {
  const Tape tape(components_, chart_->names());
  const std::vector<double> v = tape.eval(p.coords());
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

namespace {

void require_same_chart(const VectorField& a, const VectorField& b) {
  if (a.chart() != b.chart() && *a.chart() != *b.chart()) throw DimensionError("fields live on different charts");
}

}  // namespace

VectorField VectorField::operator+(const VectorField& other) const {
  require_same_chart(*this, other);
  std::vector<Expr> c(components_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = components_[i] + other.components_[i];
  return VectorField(chart_, std::move(c));
}

VectorField VectorField::operator-(const VectorField& other) const {
  require_same_chart(*this, other);
  std::vector<Expr> c(components_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = components_[i] - other.components_[i];
  return VectorField(chart_, std::move(c));
}

VectorField VectorField::operator-() const {
  std::vector<Expr> c(components_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = -components_[i];
  return VectorField(chart_, std::move(c));
}

VectorField VectorField::scaled(const Expr& f) const {
  std::vector<Expr> c(components_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = f * components_[i];
  return VectorField(chart_, std::move(c));
}

// ---------------------------------------------------------------------------
// Evaluation helpers

Eigen::MatrixXd evaluate_at(std::span<const Expr> exprs, const ComplexChart& chart, std::span<const Point> pts) {
  const Tape tape(exprs, chart.names());
  const auto n = static_cast<std::size_t>(chart.real_dim());
  std::vector<double> in;
  in.reserve(pts.size() * n);
  for (const Point& p : pts) {
    if (p.size() != n) throw DimensionError("point dimension does not match chart");
    in.insert(in.end(), p.coords().begin(), p.coords().end());
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(
      static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(exprs.size()));
  tape.eval_batch(in, pts.size(), std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

double evaluate_at(const Expr& e, const ComplexChart& chart, const Point& p) {
  return evaluate_at(std::span<const Expr>(&e, 1), chart, std::span<const Point>(&p, 1))(0, 0);
}

Eigen::MatrixXd field_values(std::span<const VectorField> fields, const Point& p) {
  if (fields.empty()) return {};
  const ComplexChart& chart = *fields.front().chart();
  std::vector<Expr> all;
  for (const VectorField& f : fields) {
    require_same_chart(fields.front(), f);
    all.insert(all.end(), f.components().begin(), f.components().end());
  }
  const Eigen::MatrixXd row = evaluate_at(all, chart, std::span<const Point>(&p, 1));
  const auto n = static_cast<Eigen::Index>(chart.real_dim());
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(fields.size()));
  for (Eigen::Index j = 0; j < out.cols(); ++j) out.col(j) = row.block(0, j * n, 1, n).transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Calculus

VectorField apply_J(const VectorField& v) {
  const std::size_t n = v.size();
  std::vector<Expr> c(n);
  for (std::size_t i = 0; i < n; i += 2) {
    c[i] = -v[i + 1];
    c[i + 1] = v[i];
  }
  return VectorField(v.chart(), std::move(c));
}

Expr derivative_along(const VectorField& v, const Expr& f) {
  const auto& names = v.chart()->names();
  Expr out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (v[i].is_zero()) continue;
    out = out + v[i] * diff(f, names[i]);
  }
  return out;
}

Expr dc_expr(const Expr& f, const VectorField& v) {
  // d^c f(V) = -df(JV) = sum_mu V^{y_mu} df/dx_mu - V^{x_mu} df/dy_mu
  const auto& names = v.chart()->names();
  Expr out;
  for (std::size_t i = 0; i < names.size(); i += 2) {
    if (!v[i + 1].is_zero()) out = out + v[i + 1] * diff(f, names[i]);
    if (!v[i].is_zero()) out = out - v[i] * diff(f, names[i + 1]);
  }
  return out;
}

double d_apply(const Expr& f, const VectorField& v, const Point& p) {
  return evaluate_at(derivative_along(v, f), *v.chart(), p);
}

double dc_apply(const Expr& f, const VectorField& v, const Point& p) {
  return evaluate_at(dc_expr(f, v), *v.chart(), p);
}

VectorField lie_bracket(const VectorField& v, const VectorField& w) {
  require_same_chart(v, w);
  std::vector<Expr> c(v.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = derivative_along(v, w[i]) - derivative_along(w, v[i]);
  return VectorField(v.chart(), std::move(c));
}

Expr ddc_expr(const Expr& f, const VectorField& v, const VectorField& w) {
  return derivative_along(v, dc_expr(f, w)) - derivative_along(w, dc_expr(f, v)) - dc_expr(f, lie_bracket(v, w));
}

double ddc_apply(const Expr& f, const VectorField& v, const VectorField& w, const Point& p) {
  return evaluate_at(ddc_expr(f, v, w), *v.chart(), p);
}

Expr laplacian(const Expr& f, const ComplexChart& chart) {
  Expr out;
  for (const std::string& name : chart.names()) out = out + diff(diff(f, name), name);
  return out;
}

ComplexField complexify(const VectorField& v) {
  ComplexField z{v.chart(), {}, {}};
  for (std::size_t i = 0; i < v.size(); i += 2) {
    z.re.push_back(v[i]);
    z.im.push_back(v[i + 1]);
  }
  return z;
}

VectorField realify(const ComplexField& z) {
  std::vector<Expr> c;
  for (std::size_t mu = 0; mu < z.re.size(); ++mu) {
    c.push_back(z.re[mu]);
    c.push_back(z.im[mu]);
  }
  return VectorField(z.chart, std::move(c));
}

std::vector<std::pair<Expr, Expr>> antiholomorphic_derivatives(const ComplexField& z) {
  const ComplexChart& chart = *z.chart;
  const Expr half = Expr::constant(0.5);
  std::vector<std::pair<Expr, Expr>> out;
  for (std::size_t mu = 0; mu < z.re.size(); ++mu) {
    for (int nu = 0; nu < chart.complex_dim(); ++nu) {
      const std::string& x = chart.x_name(nu);
      const std::string& y = chart.y_name(nu);
      // 1/2 (d/dx + i d/dy)(re + i im) = 1/2 [(re_x - im_y) + i (im_x + re_y)]
      out.emplace_back(half * (diff(z.re[mu], x) - diff(z.im[mu], y)),
                       half * (diff(z.im[mu], x) + diff(z.re[mu], y)));
    }
  }
  return out;
}

HolomorphyResult is_holomorphic(const ComplexField& z, std::span<const Point> pts, double tol) {
  const auto pairs = antiholomorphic_derivatives(z);
  std::vector<Expr> flat;
  for (const auto& [re, im] : pairs) {
    flat.push_back(re);
    flat.push_back(im);
  }
  HolomorphyResult r{true, 0.0};
  if (flat.empty() || pts.empty()) return r;
  const Eigen::MatrixXd vals = evaluate_at(flat, *z.chart, pts);
  for (Eigen::Index j = 0; j < vals.rows(); ++j) {
    for (Eigen::Index c = 0; c < vals.cols(); c += 2) {
      r.max_residual = std::max(r.max_residual, std::hypot(vals(j, c), vals(j, c + 1)));
    }
  }
  r.holomorphic = r.max_residual < tol;
  return r;
}

int distribution_rank(std::span<const VectorField> fields, const Point& p) {
  return linalg::numerical_rank(field_values(fields, p));
}

double frobenius_defect(std::span<const VectorField> fields, const Point& p) {
  const Eigen::MatrixXd span = field_values(fields, p);
  if (linalg::numerical_rank(span) < static_cast<int>(fields.size())) {
    throw NumericalError("frobenius_defect: fields are not independent at the point");
  }
  std::vector<VectorField> brackets;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = i + 1; j < fields.size(); ++j) brackets.push_back(lie_bracket(fields[i], fields[j]));
  }
  if (brackets.empty()) return 0.0;
  const Eigen::MatrixXd values = field_values(brackets, p);
  double worst = 0.0;
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    worst = std::max(worst, linalg::projection_residual(span, values.col(c)));
  }
  return worst;
}

}  // namespace cgs
