#include "cgs/error.hpp"
#include "cgs/io/system_file.hpp"
#include "cgs/verify.hpp"
#include "doctest.h"

using namespace cgs;

namespace {

GradientSystem make(int n, std::vector<std::vector<const char*>> xi, std::vector<const char*> u,
                    std::vector<const char*> domain = {}) {
  GradientSystem s;
  s.chart = std::make_shared<const ComplexChart>(n);
  for (const auto& f : xi) {
    std::vector<Expr> comps;
    for (const char* c : f) comps.push_back(parse_expr(c));
    s.xi.emplace_back(s.chart, std::move(comps));
  }
  for (const char* e : u) s.u.push_back(parse_expr(e));
  for (const char* e : domain) s.domain.push_back(parse_expr(e));
  return s;
}

GradientSystem heisenberg() {
  return make(3, {{"1", "0", "0", "0", "0", "y2"}, {"0", "0", "1", "0", "x1", "0"}, {"0", "0", "0", "0", "1", "0"}},
              {"-y1", "-y2", "-y3 + x1*y2"});
}

std::vector<Point> samples(const GradientSystem& s, int n = 40, std::uint64_t seed = 5) {
  SampleConfig c;
  c.seed = seed;
  c.points = n;
  return sample_points(s, c);
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("sampling is seeded and respects the domain") {
    const GradientSystem a = make(2, {{"x1", "y1", "0", "0"}}, {"0"}, {"x1", "y1 - 0.5"});
    const auto p1 = samples(a, 30, 9);
    const auto p2 = samples(a, 30, 9);
    REQUIRE(p1.size() == 30);
    for (std::size_t i = 0; i < p1.size(); ++i) {
      CHECK(p1[i].vector() == p2[i].vector());
      CHECK(p1[i][0] > 0.0);
      CHECK(p1[i][1] > 0.5);
      CHECK(p1[i][3] <= 2.0);
    }
    CHECK(samples(a, 30, 10)[0].vector() != p1[0].vector());
    const GradientSystem empty = make(1, {{"1", "0"}}, {"-y1"}, {"-1"});
    CHECK_THROWS_AS(samples(empty), NumericalError);
  }

  TEST_CASE("axioms hold for the line and fail for a mis-scaled field") {
    const GradientSystem line = make(1, {{"1", "0"}}, {"-y1"});
    CHECK(check_axioms(line, samples(line), 1e-12).passed());
    const GradientSystem bad = make(1, {{"2", "0"}}, {"-y1"});
    const Report r = check_axioms(bad, samples(bad), 1e-12);
    CHECK_FALSE(r.passed());
    REQUIRE(r.find("dc-normalization"));
    CHECK_FALSE(r.find("dc-normalization")->pass);
    CHECK(r.find("du-vanishes-on-fields")->pass);
  }

  TEST_CASE("the displayed Heisenberg u3 violates du3(xi1) = 0") {
    GradientSystem h = heisenberg();
    CHECK(check_axioms(h, samples(h), 1e-12).passed());
    h.u[2] = parse_expr("-(y3 + x1*y2)");
    const Report r = check_axioms(h, samples(h), 1e-12);
    CHECK_FALSE(r.find("du-vanishes-on-fields")->pass);
  }

  TEST_CASE("a change of basis keeps every residual table passing") {
    const GradientSystem h = heisenberg();
    Eigen::MatrixXd b(3, 3);
    b << 1.0, 0.5, 0.0, -0.25, 2.0, 0.0, 0.3, 0.0, 1.0;
    const GradientSystem r = h.rebased(b);
    const auto pts = samples(r);
    CHECK(check_axioms(r, pts, 1e-10).passed());
    CHECK(decomposition_checks(r, pts, 1e-10).passed());
    CHECK(check_bracket_relations(r, pts, 1e-10).passed());
    CHECK(check_commutation(r, pts, 1e-10).passed());
    CHECK_THROWS_AS(h.rebased(Eigen::MatrixXd::Zero(3, 3)), Error);
  }

  TEST_CASE("decomposition counts") {
    const GradientSystem h = heisenberg();
    const DecompositionRecord d = check_decompositions(h, samples(h, 1)[0]);
    CHECK(d.counts_ok());
    CHECK(d.real_rank == 6);
    CHECK(d.kernel_dim == 3);
    CHECK(d.horizontal_dim == 0);

    const GradientSystem model = make(2, {{"0", "0", "1", "0"}}, {"x1^2 - y1^2 - y2"});
    const DecompositionRecord m = check_decompositions(model, Point(std::vector<double>{0.2, 0.1, 0.3, -0.4}));
    CHECK(m.counts_ok());
    CHECK(m.horizontal_dim == 2);
    CHECK(m.kernel_dim == 3);

    const GradientSystem degenerate = make(1, {{"1", "0"}}, {"-y1^3"});
    const DecompositionRecord z = check_decompositions(degenerate, Point(std::vector<double>{0.4, 0.0}));
    CHECK(z.kernel_dim == 2);
    CHECK_FALSE(z.counts_ok());
  }

  TEST_CASE("bracket relations and commutation") {
    const GradientSystem h = heisenberg();
    const auto pts = samples(h);
    const Report b = check_bracket_relations(h, pts, 1e-12);
    CHECK(b.passed());
    CHECK(check_commutation(h, pts, 1e-12).passed());
    const GradientSystem twisted = make(2, {{"1", "0", "0", "0"}}, {"-y1 + y2*x1"});
    CHECK_FALSE(check_axioms(twisted, samples(twisted), 1e-9).passed());
  }

  TEST_CASE("ddc identities detect a wrong gradient map") {
    GradientSystem h = heisenberg();
    h.u[2] = parse_expr("-y3 + 2*x1*y2");
    const Report b = check_bracket_relations(h, samples(h), 1e-9);
    REQUIRE(b.find("ddc-bracket-identities") != nullptr);
    CHECK_FALSE(b.find("ddc-bracket-identities")->pass);
  }

  TEST_CASE("ddc identities stay within rounding on the affine system near y1 = 0") {
    const GradientSystem a = make(2, {{"x1", "y1", "y2*(x1/y1 - 1/atan2(y1, x1))", "y2"},
                                      {"0", "0", "y1/atan2(y1, x1)", "0"}},
                                  {"-atan2(y1, x1)", "-y2*atan2(y1, x1)/y1"}, {"x1", "y1"});
    // y1 = 6e-6: the third component of xi1 cancels two terms of size 3e5.
    const std::vector<Point> pts{Point(std::vector<double>{1.67, 6e-6, -1.99, -0.66}),
                                 Point(std::vector<double>{0.4, 1e-4, 1.2, 0.3})};
    const Report b = check_bracket_relations(a, pts, 1e-9);
    CHECK(b.passed());
  }

  TEST_CASE("classification") {
    const GradientSystem h = heisenberg();
    const Classification ch = classify(h, samples(h), 1e-9);
    CHECK_FALSE(ch.abelian);
    CHECK_FALSE(ch.holomorphic);
    CHECK(ch.harmonic);
    const GradientSystem model = make(2, {{"0", "0", "1", "0"}}, {"x1^2 - y1^2 - y2"});
    const Classification cm = classify(model, samples(model), 1e-9);
    CHECK(cm.abelian);
    CHECK(cm.holomorphic);
    CHECK(cm.harmonic);
    const io::SystemFile affine = io::load_named("affine");
    const Classification ca = classify(*affine.system, samples(*affine.system), 1e-9);
    CHECK_FALSE(ca.harmonic);
    CHECK(ca.harmonic_residual > 1e-3);
  }

  TEST_CASE("level sets") {
    const GradientSystem model = make(2, {{"0", "0", "1", "0"}}, {"x1^2 - y1^2 - y2"});
    const std::vector<double> zero{0.0};
    const LevelSetResult r = check_level_set(model, zero, samples(model, 10), 1e-9);
    CHECK(r.report.passed());
    CHECK_FALSE(r.empty);
    CHECK(r.points.size() == 10);
    for (const Point& p : r.points) CHECK(std::abs(p[0] * p[0] - p[1] * p[1] - p[3]) < 1e-9);

    const GradientSystem alt = make(1, {{"exp(y1)", "0"}}, {"exp(-y1) - 1"});
    const std::vector<double> below{-2.0};
    const LevelSetResult e = check_level_set(alt, below, samples(alt, 5), 1e-9);
    CHECK(e.empty);
    CHECK(e.report.passed());
  }
}
