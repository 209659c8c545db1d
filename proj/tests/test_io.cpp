#include <set>

#include "cgs/error.hpp"
#include "cgs/io/gallery.hpp"
#include "cgs/io/system_file.hpp"
#include "cgs/verify.hpp"
#include "doctest.h"

using namespace cgs;
using namespace cgs::io;

namespace {

const char* kLine = R"(
# comment line
[chart]
N = 1
names = x1, y1

[system]
k = 1
xi1 = 1, 0   # trailing comment
u1 = -y1
)";

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("gallery contents") {
    std::vector<std::string> names;
    for (const GalleryEntry& g : gallery_files()) names.emplace_back(g.name);
    const std::vector<std::string> expect{"affine",   "broken-demo", "heisenberg",       "heisenberg-cr",
                                          "line",     "line-alt",    "model-k1",         "model-k1-rotated",
                                          "non-transverse-demo"};
    CHECK(names == expect);
    for (const GalleryEntry& g : gallery_files()) CHECK_NOTHROW(parse_system(g.text, std::string(g.name)));
  }

  TEST_CASE("heisenberg loads with k = 3 and N = 3") {
    const SystemFile f = load_named("heisenberg.cgs");
    REQUIRE(f.system.has_value());
    CHECK(f.system->k() == 3);
    CHECK(f.chart->complex_dim() == 3);
    CHECK(f.config.level_set.has_value());
  }

  TEST_CASE("affine file uses atan2") {
    const SystemFile f = load_named("affine");
    CHECK(variables(f.system->u[0]) == std::set<std::string>{"x1", "y1"});
    CHECK(f.system->domain.size() == 2);
  }

  TEST_CASE("minimal file") {
    const SystemFile f = parse_system(kLine, "mini");
    CHECK(f.name == "mini");
    CHECK(f.system->k() == 1);
    CHECK_FALSE(f.cr.has_value());
  }

  TEST_CASE("errors carry line numbers") {
    auto fails_at = [](const std::string& text, std::size_t line) {
      try {
        parse_system(text);
      } catch (const FormatError& e) {
        CHECK_MESSAGE(e.line() == line, e.what());
        return;
      }
      FAIL("no error for: " << text);
    };
    fails_at("[chart]\nN = 3\n[system]\nk = 1\nxi1 = 1, 0, 0, 0, 0\nu1 = 0\n", 5);
    fails_at("[chart]\nN = 1\ncolour = red\n[system]\nk = 1\nxi1 = 1, 0\nu1 = -y1\n", 3);
    fails_at("[chart]\nN = 1\n[sistem]\n", 3);
    fails_at("[chart]\nN = 1\n[system]\nk = 1\nxi1 = 1, 0\nu1 = -y1 +\n", 6);
    fails_at("[chart]\nN = 1\n[system]\nk = 1\nxi1 = 1, 0\nu1 = -q\n", 6);
    fails_at("N = 1\n", 1);
    fails_at("[chart]\nN = 1\nN = 2\n", 3);
    fails_at("[chart]\nN = 1.5\n", 2);
    fails_at("[chart]\nN = 1\nnames = a, b, c\n", 3);
    fails_at("[chart]\nN = 1\n[system]\nk = 1\nxi1 = 1, 0\nu1 = -y1\n[config]\nseed = -4\n", 8);
    CHECK_THROWS_AS(parse_system("[chart]\nN = 1\n"), FormatError);
    CHECK_THROWS_AS(parse_system("[chart]\nN = 1\n[system]\nk = 1\nu1 = 0\n"), FormatError);
  }

  TEST_CASE("unreadable paths") {
    CHECK_THROWS_AS(load("/nonexistent/x.cgs"), FormatError);
    CHECK_THROWS_AS(load_named("no-such-system"), FormatError);
  }

  TEST_CASE("serialization round-trips and keeps residual tables") {
    for (const GalleryEntry& g : gallery_files()) {
      CAPTURE(g.name);
      const SystemFile a = parse_system(g.text, std::string(g.name));
      const std::string text = serialize(a);
      const SystemFile b = parse_system(text, std::string(g.name));
      CHECK(serialize(b) == text);
      if (!a.system) continue;
      SampleConfig sc;
      sc.seed = 3;
      sc.points = 25;
      const Report ra = check_axioms(*a.system, sc, 1e-9);
      const Report rb = check_axioms(*b.system, sc, 1e-9);
      REQUIRE(ra.checks.size() == rb.checks.size());
      for (std::size_t i = 0; i < ra.checks.size(); ++i) CHECK(ra.checks[i].residuals == rb.checks[i].residuals);
    }
  }

  TEST_CASE("digest") {
    CHECK(digest("") == "cbf29ce484222325");
    CHECK(digest("a") == "af63dc4c8601ec8c");
    CHECK(digest(kLine).size() == 16);
  }

  TEST_CASE("top-level splitting") {
    CHECK(split_top_level("a, atan2(y, x), b") == std::vector<std::string>{"a", "atan2(y, x)", "b"});
    CHECK(split_top_level("1 2; 2 3", ';') == std::vector<std::string>{"1 2", "2 3"});
    CHECK(split_top_level("").empty());
  }
}
