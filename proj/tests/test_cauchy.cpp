#include <cmath>

#include "cgs/cauchy.hpp"
#include "cgs/error.hpp"
#include "cgs/io/system_file.hpp"
#include "doctest.h"

using namespace cgs;

namespace {

CRInitialData line_data() {
  CRInitialData d;
  d.chart = std::make_shared<const ComplexChart>(1);
  d.k = 1;
  d.params = {"s"};
  d.sigma = {parse_expr("s"), parse_expr("0")};
  d.rho = {{parse_expr("1"), parse_expr("0")}};
  d.extension = {VectorField(d.chart, {parse_expr("1"), parse_expr("0")})};
  d.param_anchor = {0.0};
  return d;
}

}  // namespace

TEST_SUITE("cauchy") {
  TEST_CASE("initial data validation") {
    CRInitialData d = line_data();
    CHECK_NOTHROW(d.validate());
    d.sigma.pop_back();
    CHECK_THROWS_AS(d.validate(), DimensionError);
    d = line_data();
    d.rho[0][0] = parse_expr("t");
    CHECK_THROWS_AS(d.validate(), DimensionError);
    d = line_data();
    d.params.push_back("t");
    CHECK_THROWS_AS(d.validate(), DimensionError);
  }

  TEST_CASE("flow source is required and must be holomorphic") {
    CRInitialData d = line_data();
    d.extension.clear();
    CHECK_THROWS_AS(build_F(d, {}), RefusalError);
    d = line_data();
    d.extension = {VectorField(d.chart, {parse_expr("y1 + 1"), parse_expr("0")})};
    CHECK_THROWS_AS(build_F(d, {}), RefusalError);
  }

  TEST_CASE("F on the line") {
    const CauchyMap f = build_F(line_data(), {});
    Eigen::VectorXd pu(2);
    pu << 0.3, 0.2;
    const Eigen::VectorXd z = f(pu);
    CHECK(std::abs(z(0) - 0.3) < 1e-14);
    CHECK(std::abs(z(1) - 0.2) < 1e-14);
  }

  TEST_CASE("query grid ordering") {
    QueryGrid g;
    g.base = {1.0, 0.0, 2.0, 0.0};
    g.axes = {{"y1", -1.0, 1.0, 2}, {"y2", 0.0, 1.0, 3}};
    const ComplexChart c(2);
    const auto pts = g.points(c);
    REQUIRE(pts.size() == 6);
    CHECK(pts[0][1] == -1.0);
    CHECK(pts[0][3] == 0.0);
    CHECK(pts[1][3] == 0.5);
    CHECK(pts[3][1] == 1.0);
    CHECK(pts[5][0] == 1.0);
    CHECK(g.points(c, 5).size() == 25);
  }

  TEST_CASE("frame at the anchor") {
    const CauchyMap f = build_F(line_data(), {});
    const AdaptedFrame fr = compute_PQA(f, Eigen::Vector2d(0.1, 0.0), 1e-6);
    CHECK(std::abs(fr.P(0, 0) - 1.0) < 1e-8);
    CHECK(std::abs(fr.Q(0, 0)) < 1e-8);
    const ConstructedFields c = construct_fields(fr);
    CHECK(std::abs(c.xi(0, 0) - 1.0) < 1e-8);
    CHECK(std::abs(c.xi(1, 0)) < 1e-8);
  }

  TEST_CASE("line reconstruction") {
    std::vector<Point> q;
    for (double y : {-0.4, -0.1, 0.0, 0.25, 0.5}) q.emplace_back(std::vector<double>{0.7, y});
    const CauchyResult r = solve(line_data(), q, {});
    CHECK(r.report.passed());
    REQUIRE(r.points.size() == q.size());
    for (const CauchyPoint& p : r.points) {
      CHECK(p.error.empty());
      CHECK(std::abs(p.value(0) + p.query[1]) < 1e-9);
      CHECK(std::abs(p.xi(0, 0) - 1.0) < 1e-7);
      CHECK(std::abs(p.xi(1, 0)) < 1e-7);
    }
  }

  TEST_CASE("non-transverse data returns a witness") {
    CRInitialData d = line_data();
    d.rho = {{parse_expr("s"), parse_expr("0")}};
    d.extension = {VectorField(d.chart, {parse_expr("x1"), parse_expr("y1")})};
    const CauchyMap f = build_F(d, {});
    const std::vector<Eigen::VectorXd> ps{Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Zero(1)};
    const TransverseResult t = check_cr_transverse(f, ps);
    CHECK_FALSE(t.transverse);
    REQUIRE(t.witness.has_value());
    CHECK(*t.witness == 1);
    const std::vector<Point> q{Point(std::vector<double>{0.3, 0.1})};
    const CauchyResult r = solve(d, q, {});
    CHECK_FALSE(r.report.passed());
    CHECK_FALSE(r.report.find("cr-transverse")->pass);
    CHECK(r.points.empty());
  }

  TEST_CASE("matrix-group flow reproduces the Heisenberg gradient map") {
    const io::SystemFile f = io::load_named("heisenberg-cr");
    REQUIRE(f.cr.has_value());
    const std::vector<Point> q{Point(std::vector<double>{0.25, 0.3, -0.2, -0.1, 0.1, 0.2})};
    const CauchyResult r = solve(*f.cr, q, {});
    REQUIRE(r.points.size() == 1);
    const CauchyPoint& p = r.points[0];
    CHECK(std::abs(p.value(0) + 0.3) < 1e-8);
    CHECK(std::abs(p.value(1) - 0.1) < 1e-8);
    CHECK(std::abs(p.value(2) - (-0.2 + 0.25 * -0.1)) < 1e-8);
  }
}
