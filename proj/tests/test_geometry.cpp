#include <cmath>

#include "cgs/error.hpp"
#include "cgs/geometry.hpp"
#include "doctest.h"

using namespace cgs;

namespace {

VectorField field(const ChartPtr& c, std::initializer_list<const char*> comps) {
  std::vector<Expr> e;
  for (const char* s : comps) e.push_back(parse_expr(s));
  return VectorField(c, std::move(e));
}

double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("chart naming and lookup") {
    const ComplexChart c(2);
    CHECK(c.names() == std::vector<std::string>{"x1", "y1", "x2", "y2"});
    CHECK(c.index_of("y2") == 3);
    CHECK_FALSE(c.index_of("z").has_value());
    CHECK_THROWS_AS(ComplexChart(std::vector<std::string>{"a", "b", "c"}), DimensionError);
    CHECK_THROWS_AS(ComplexChart(std::vector<std::string>{"a", "a"}), DimensionError);
  }

  TEST_CASE("fields need one component per real coordinate") {
    const auto c = std::make_shared<const ComplexChart>(1);
    CHECK_THROWS_AS(field(c, {"1"}), DimensionError);
    CHECK_THROWS_AS(field(c, {"1", "z"}), DimensionError);
  }

  TEST_CASE("complex structure on coordinate fields") {
    const auto c = std::make_shared<const ComplexChart>(1);
    const Point p(std::vector<double>{0.3, -0.7});
    CHECK(max_abs(apply_J(field(c, {"1", "0"})).at(p) - Eigen::Vector2d(0, 1)) == 0.0);
    CHECK(max_abs(apply_J(field(c, {"0", "1"})).at(p) - Eigen::Vector2d(-1, 0)) == 0.0);
    const VectorField v = field(c, {"x1*y1", "exp(x1)"});
    CHECK(max_abs(apply_J(apply_J(v)).at(p) + v.at(p)) == 0.0);
  }

  TEST_CASE("d and dc") {
    const auto c = std::make_shared<const ComplexChart>(1);
    const Point p(std::vector<double>{0.4, 0.2});
    const Expr u = parse_expr("-y1");
    CHECK(d_apply(u, field(c, {"1", "0"}), p) == 0.0);
    CHECK(dc_apply(u, field(c, {"1", "0"}), p) == 1.0);
    const Expr f = parse_expr("x1^2*y1");
    const VectorField v = field(c, {"y1", "x1"});
    CHECK(dc_apply(f, v, p) == doctest::Approx(-d_apply(f, apply_J(v), p)).epsilon(1e-15));
  }

  TEST_CASE("lie brackets") {
    const auto c = std::make_shared<const ComplexChart>(1);
    const Point p(std::vector<double>{1.5, -0.5});
    const VectorField b = lie_bracket(field(c, {"0", "x1"}), field(c, {"1", "0"}));
    CHECK(max_abs(b.at(p) - Eigen::Vector2d(0, -1)) == 0.0);
    const VectorField v = field(c, {"x1*y1", "sin(x1)"});
    const VectorField w = field(c, {"y1^2", "x1 - y1"});
    CHECK(max_abs(lie_bracket(v, w).at(p) + lie_bracket(w, v).at(p)) < 1e-15);
  }

  TEST_CASE("ddc identity and laplacian") {
    const ComplexChart c(2);
    CHECK(laplacian(parse_expr("x1^2 - y1^2 + x2*y2"), c).is_zero() == false);
    const Point p(std::vector<double>{0.1, 0.2, 0.3, 0.4});
    CHECK(evaluate_at(laplacian(parse_expr("x1^2 - y1^2 + x2*y2"), c), c, p) == 0.0);
    CHECK(evaluate_at(laplacian(parse_expr("x1^2 + y2^2"), c), c, p) == 4.0);
  }

  TEST_CASE("complexify and holomorphy") {
    const auto c = std::make_shared<const ComplexChart>(3);
    const VectorField euler = field(c, {"x1", "y1", "0", "0", "0", "0"});
    const ComplexField z = complexify(euler);
    const Point p(std::vector<double>{0.5, -0.25, 0, 0, 0, 0});
    CHECK(evaluate_at(z.re[0], *c, p) == 0.5);
    CHECK(evaluate_at(z.im[0], *c, p) == -0.25);
    CHECK(max_abs(realify(z).at(p) - euler.at(p)) == 0.0);
    const std::vector<Point> pts{p, Point(std::vector<double>{1, 2, 3, 4, 5, 6})};
    CHECK(is_holomorphic(z, pts, 1e-12).holomorphic);
    const ComplexField bad = complexify(field(c, {"1", "0", "0", "0", "0", "y2"}));
    CHECK_FALSE(is_holomorphic(bad, pts, 1e-12).holomorphic);
  }

  TEST_CASE("rank and frobenius defect") {
    const auto c = std::make_shared<const ComplexChart>(2);
    const Point p(std::vector<double>{0.3, 0.1, -0.2, 0.5});
    const std::vector<VectorField> flat{field(c, {"1", "0", "0", "0"}), field(c, {"0", "1", "0", "0"})};
    CHECK(distribution_rank(flat, p) == 2);
    CHECK(frobenius_defect(flat, p) < 1e-15);
    const std::vector<VectorField> twisted{field(c, {"1", "0", "0", "0"}), field(c, {"0", "x1", "1", "0"})};
    CHECK(frobenius_defect(twisted, p) == doctest::Approx(1.0 / std::sqrt(1.09)).epsilon(1e-12));
    const std::vector<VectorField> dependent{flat[0], flat[0]};
    CHECK(distribution_rank(dependent, p) == 1);
    CHECK_THROWS_AS(frobenius_defect(dependent, p), NumericalError);
  }
}
