#include <cmath>

#include "cgs/error.hpp"
#include "cgs/io/system_file.hpp"
#include "cgs/verify.hpp"
#include "doctest.h"

using namespace cgs;
using C = std::complex<double>;

namespace {

GradientSystem model() {
  GradientSystem s;
  s.chart = std::make_shared<const ComplexChart>(2);
  s.xi = {VectorField(s.chart, {parse_expr("0"), parse_expr("0"), parse_expr("1"), parse_expr("0")})};
  s.u = {parse_expr("x1^2 - y1^2 - y2")};
  return s;
}

std::vector<Point> samples(const GradientSystem& s) {
  SampleConfig c;
  c.points = 20;
  return sample_points(s, c);
}

}  // namespace

TEST_SUITE("normal_form") {
  TEST_CASE("slice selection avoids the field directions") {
    const GradientSystem s = model();
    CHECK(select_slice(s, Point(std::vector<double>(4, 0.0))) == std::vector<int>{0});
    GradientSystem swapped = s;
    swapped.xi = {VectorField(s.chart, {parse_expr("1"), parse_expr("0"), parse_expr("0"), parse_expr("0")})};
    swapped.u = {parse_expr("-y1")};
    CHECK(select_slice(swapped, Point(std::vector<double>(4, 0.0))) == std::vector<int>{1});
  }

  TEST_CASE("phi follows the fields") {
    const GradientSystem s = model();
    const std::vector<int> slice{0};
    const std::vector<C> z{C(0.1, -0.2)};
    const std::vector<C> w{C(0.3, 0.4)};
    const Point q = normal_form_phi(s, Point(std::vector<double>(4, 0.0)), slice, z, w, {});
    CHECK(std::abs(q[0] - 0.1) < 1e-14);
    CHECK(std::abs(q[1] + 0.2) < 1e-14);
    CHECK(std::abs(q[2] - 0.3) < 1e-14);
    CHECK(std::abs(q[3] - 0.4) < 1e-14);
  }

  TEST_CASE("model recovers F = x^2 - y^2") {
    const GradientSystem s = model();
    NormalFormConfig cfg;
    cfg.oracle = {parse_expr("x1^2 - y1^2")};
    const NormalForm nf = normal_form(s, samples(s), cfg);
    CHECK(nf.report.passed());
    REQUIRE(nf.f.size() == 121);
    for (std::size_t i = 0; i < 11; ++i) {
      for (std::size_t j = 0; j < 11; ++j) {
        const double x = nf.grid_x[i], y = nf.grid_y[j];
        CHECK(std::abs(nf.f[i * 11 + j][0] - (x * x - y * y)) < 1e-12);
      }
    }
  }

  TEST_CASE("oracle variables must be slice coordinates") {
    const GradientSystem s = model();
    NormalFormConfig cfg;
    cfg.oracle = {parse_expr("x2")};
    CHECK_THROWS_AS(normal_form(s, samples(s), cfg), DimensionError);
  }

  TEST_CASE("normal form of a normal form is itself up to the shift in w") {
    const GradientSystem s = model();
    NormalFormConfig cfg;
    cfg.grid = 5;
    const NormalForm first = normal_form(s, samples(s), cfg);
    const C w0(0.3, 0.2);
    const std::vector<int> slice = first.slice;
    const std::vector<C> z0{C(0.0, 0.0)};
    const std::vector<C> w{w0};
    cfg.base = normal_form_phi(s, Point(std::vector<double>(4, 0.0)), slice, z0, w, {});
    const NormalForm second = normal_form(s, samples(s), cfg);
    CHECK(second.report.passed());
    REQUIRE(second.f.size() == first.f.size());
    for (std::size_t i = 0; i < first.f.size(); ++i) {
      CHECK(std::abs(second.f[i][0] + w0.imag() - first.f[i][0]) < 1e-12);
    }
  }

  TEST_CASE("refusals") {
    const io::SystemFile h = io::load_named("heisenberg");
    CHECK_THROWS_AS(normal_form(*h.system, samples(*h.system), {}), RefusalError);
    GradientSystem alt;
    alt.chart = std::make_shared<const ComplexChart>(1);
    alt.xi = {VectorField(alt.chart, {parse_expr("exp(y1)"), parse_expr("0")})};
    alt.u = {parse_expr("exp(-y1) - 1")};
    CHECK_THROWS_AS(normal_form(alt, samples(alt), {}), RefusalError);
  }

  TEST_CASE("escaping flows are reported") {
    GradientSystem s;
    s.chart = std::make_shared<const ComplexChart>(2);
    s.xi = {VectorField(s.chart, {parse_expr("0"), parse_expr("0"), parse_expr("1"), parse_expr("0")})};
    s.u = {parse_expr("x1^2 - y1^2 - y2")};
    s.domain = {parse_expr("0.1 - x2")};
    NormalFormConfig cfg;
    cfg.table_w = C(0.5, 0.0);
    CHECK_THROWS_AS(normal_form(s, samples(s), cfg), NumericalError);
  }
}
