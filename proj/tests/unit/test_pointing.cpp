#include <doctest.h>

#include "dense/core/error.hpp"
#include "dense/pointing/format.hpp"
#include "support/generators.hpp"

using namespace dense;
using namespace dense::pointing;

namespace {

PointAnnotation pt(std::string name, const char* x, const char* y, int order = 0) {
  return {std::move(name), *Percent::parse(x), *Percent::parse(y), order};
}

const std::string kLiteral =
    "a table with food\n<point>65.20,63.90</point> table; <point>52.60,58.60</point> food; ";

}  // namespace

TEST_CASE("serialize_points") {
  const std::vector<PointAnnotation> two{pt("table", "65.20", "63.90", 0), pt("food", "52.60", "58.60", 1)};
  CHECK(serialize_points(two) == "<point>65.20,63.90</point> table; <point>52.60,58.60</point> food; ");
  CHECK(serialize_points({}) == "");
  const std::vector<PointAnnotation> padded{pt("x", "5", "5")};
  CHECK(serialize_points(padded) == "<point>5.00,5.00</point> x; ");

  const std::vector<PointAnnotation> reversed{pt("food", "52.60", "58.60", 1), pt("table", "65.20", "63.90", 0)};
  CHECK(serialize_points(reversed) == serialize_points(two));

  const std::vector<PointAnnotation> bad{pt("x", "100.01", "0")};
  CHECK_THROWS_AS(serialize_points(bad), Error);
  try {
    serialize_points(bad);
  } catch (const Error& e) {
    CHECK(e.code() == "INVALID_POINT");
  }
}

TEST_CASE("build_training_response") {
  const std::vector<PointAnnotation> two{pt("table", "65.20", "63.90", 0), pt("food", "52.60", "58.60", 1)};
  CHECK(build_training_response("a table with food", two) == kLiteral);
  CHECK(build_training_response("x", {}) == "x\n");
  CHECK_THROWS_AS(build_training_response("  ", {}), Error);
}

TEST_CASE("parse the literal example response") {
  const auto r = parse_points(kLiteral);
  CHECK(r.residual == "a table with food");
  REQUIRE(r.points.size() == 2);
  CHECK(r.points[0] == pt("table", "65.20", "63.90", 0));
  CHECK(r.points[1] == pt("food", "52.60", "58.60", 1));
  CHECK(r.diagnostics.empty());
}

TEST_CASE("parse diagnostics") {
  SUBCASE("coordinate above 100") {
    const auto r = parse_points("<point>120.00,5.00</point> x; ");
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0] == Diagnostic{0, "COORD_RANGE"});
    CHECK(r.points.empty());
    CHECK(r.out_of_range.size() == 1);
  }
  SUBCASE("missing name") {
    const auto r = parse_points("cap <point>1,2</point> ; ");
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0] == Diagnostic{4, "MISSING_NAME"});
  }
  SUBCASE("unclosed tag keeps the text") {
    const auto r = parse_points("cap <point>1,2 lamp");
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].reason == "UNCLOSED_TAG");
    CHECK(r.residual == "cap <point>1,2 lamp");
  }
  SUBCASE("malformed coordinates") {
    const auto r = parse_points("<point>1;2</point> a; <point>1e2,3</point> b; <point>4,5,6</point> c; ");
    CHECK(r.points.empty());
    CHECK(std::count_if(r.diagnostics.begin(), r.diagnostics.end(),
                        [](const Diagnostic& d) { return d.reason == "MALFORMED_COORDS"; }) >= 2);
  }
  SUBCASE("unterminated final entry is accepted with a note") {
    const auto r = parse_points("cap\n<point>10.5,20</point> lamp\ntrailing words");
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].name == "lamp");
    CHECK(r.points[0].x.str() == "10.50");
    CHECK(r.residual == "cap\n\ntrailing words");
    CHECK(r.diagnostics[0].reason == "MISSING_SEPARATOR");
  }
  SUBCASE("lenient spacing and rounding") {
    const auto r = parse_points("<point> 65.2 , 63.905 </point>   table ;");
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].x.str() == "65.20");
    CHECK(r.points[0].y.str() == "63.90");  // ties go to even
    CHECK(r.points[0].name == "table");
  }
}

TEST_CASE("grounding report") {
  GroundedCaption gold{"a table with food", {pt("table", "65.20", "63.90", 0), pt("food", "52.60", "58.60", 1)}};
  SUBCASE("all names present") {
    const auto g = grounding_report(gold, kLiteral);
    CHECK(g.consistency == 1.0);
    CHECK(g.duplicates == 0);
    CHECK(g.out_of_range == 0);
    CHECK(g.gold_name_recall == 1.0);
  }
  SUBCASE("repeated point") {
    const auto g = grounding_report(
        gold, "a cup\n<point>10,10</point> cup; <point>10,10</point> cup; <point>10,10</point> cup; ");
    CHECK(g.duplicates == 2);
    CHECK(g.consistency == 1.0);
    CHECK(g.gold_name_recall == 0.0);
  }
  SUBCASE("coordinates beyond 100 percent") {
    const auto g = grounding_report(
        gold, "A table.\n<point>120.5,30</point> table; <point>130,140</point> chair; <point>120.5,30</point> table; ");
    CHECK(g.out_of_range == 3);
    CHECK(g.duplicates == 1);
    CHECK(g.consistency == doctest::Approx(2.0 / 3.0));
  }
}

TEST_CASE("property: parse(build(c, P)) == (c, P)") {
  Rng rng(20240611);
  for (int i = 0; i < 1000; ++i) {
    const std::string c = testgen::caption(rng);
    const auto p = testgen::point_list(rng);
    const auto r = parse_points(build_training_response(c, p));
    INFO("caption=" << c);
    CHECK(r.residual == c);
    CHECK(r.points == p);
    CHECK(r.diagnostics.empty());
  }
}

TEST_CASE("property: canonical strings are fixed points and serialization is injective") {
  Rng rng(99);
  std::map<std::string, std::vector<PointAnnotation>> seen;
  for (int i = 0; i < 500; ++i) {
    const auto p = testgen::point_list(rng, 4);
    const std::string s = serialize_points(p);
    CHECK(serialize_points(parse_points(s).points) == s);
    auto [it, fresh] = seen.emplace(s, p);
    if (!fresh) CHECK(it->second == p);
  }
}

TEST_CASE("property: parse never throws on arbitrary input") {
  Rng rng(7);
  for (int i = 0; i < 3000; ++i) {
    const std::string s = testgen::random_bytes(rng, 40);
    ParseResult r;
    CHECK_NOTHROW(r = parse_points(s));
    CHECK(r.residual.size() <= s.size());
    for (const auto& d : r.diagnostics) CHECK(d.offset < s.size());
    for (const auto& p : r.points) CHECK(p.x.in_range());
  }
}
