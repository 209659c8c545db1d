#include "cgs/system.hpp"

#include <cmath>
#include <random>

namespace cgs {

void GradientSystem::validate() const {
  if (!chart) throw DimensionError("gradient system needs a chart");
  if (xi.empty()) throw DimensionError("gradient system needs at least one field");
  if (xi.size() != u.size()) throw DimensionError("gradient system needs one component u_a per field xi_a");
  if (k() > chart->complex_dim()) throw DimensionError("gradient system dimension k exceeds the chart dimension");
  for (const VectorField& f : xi) {
    if (*f.chart() != *chart) throw DimensionError("fields must live on the system chart");
  }
  auto check_vars = [&](const Expr& e, const char* what) {
    for (const std::string& v : variables(e)) {
      if (!chart->index_of(v)) throw DimensionError(std::string(what) + " uses unknown coordinate '" + v + "'");
    }
  };
  for (const Expr& e : u) check_vars(e, "gradient component");
  for (const Expr& e : domain) check_vars(e, "domain constraint");
}

bool GradientSystem::in_domain(const Point& p) const {
  for (const Expr& e : domain) {
    try {
      if (!(evaluate_at(e, *chart, p) > 0.0)) return false;
    } catch (const DomainError&) {
      return false;
    }
  }
  return true;
}

std::vector<VectorField> GradientSystem::j_fields() const {
  std::vector<VectorField> out;
  out.reserve(xi.size());
  for (const VectorField& f : xi) out.push_back(apply_J(f));
  return out;
}

GradientSystem GradientSystem::rebased(const Eigen::MatrixXd& b) const {
  const auto kk = static_cast<Eigen::Index>(k());
  if (b.rows() != kk || b.cols() != kk) throw DimensionError("rebased: basis change must be k x k");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
  if (!lu.isInvertible()) throw DimensionError("rebased: basis change is singular");
  const Eigen::MatrixXd inv = lu.inverse();
  GradientSystem out{chart, {}, {}, domain};
  for (Eigen::Index a = 0; a < kk; ++a) {
    VectorField f = VectorField::zero(chart);
    Expr ua;
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (b(c, a) != 0.0) f = f + xi[static_cast<std::size_t>(c)].scaled(Expr::constant(b(c, a)));
      if (inv(a, c) != 0.0) ua = ua + Expr::constant(inv(a, c)) * u[static_cast<std::size_t>(c)];
    }
    out.xi.push_back(f);
    out.u.push_back(ua);
  }
  return out;
}

namespace {

bool accepted(const std::vector<Expr>& constraints, const ComplexChart& chart, const Point& p) {
  for (const Expr& e : constraints) {
    try {
      if (!(evaluate_at(e, chart, p) > 0.0)) return false;
    } catch (const DomainError&) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<Point> sample_points(const GradientSystem& sys, const SampleConfig& cfg) {
  if (cfg.points < 1) throw DimensionError("sample_points: need at least one point");
  std::mt19937_64 rng(cfg.seed);
  const auto n = static_cast<std::size_t>(sys.chart->real_dim());
  std::vector<Point> out;
  const long attempts = 100L * cfg.points;
  std::vector<double> x(n);
  for (long a = 0; a < attempts && static_cast<int>(out.size()) < cfg.points; ++a) {
    for (double& c : x) {
      // 53 random bits mapped to [0, 1)
      const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      c = cfg.box * (2.0 * unit - 1.0);
    }
    Point p(x);
    if (sys.in_domain(p) && accepted(cfg.extra_domain, *sys.chart, p)) out.push_back(std::move(p));
  }
  if (out.empty()) throw NumericalError("no valid sample points found in the domain");
  return out;
}

}  // namespace cgs
