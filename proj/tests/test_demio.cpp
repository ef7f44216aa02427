#include <doctest.h>

#include <random>

#include "demest/dem_io.hpp"
#include "support/oracles.hpp"

using namespace demest;

TEST_CASE("parse a single error record") {
  Dem dem = parse_dem("error(0.1) D0 D1\n");
  REQUIRE(dem.edge_count() == 1);
  CHECK(dem.edge(0) == DetectorSet({0, 1}, 2));
  CHECK(dem.rate(0) == doctest::Approx(0.1));
}

TEST_CASE("duplicate edges merge by inclusion-exclusion") {
  Dem dem = parse_dem("error(0.1) D0\nerror(0.2) D0\n");
  REQUIRE(dem.edge_count() == 1);
  // Two-excitation enumeration: odd firings = 0.1*0.8 + 0.2*0.9 = 0.26.
  CHECK(dem.rate(0) == doctest::Approx(0.26));
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_AS(parse_dem("error(0.1) D0 D0\n"), ParseError);
  try {
    parse_dem("error(0.1) D0\nerror(0.2) D1 D1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_dem("error(1.5) D0\n"), ParseError);
  CHECK_THROWS_AS(parse_dem("error(0.1)\n"), ParseError);
  CHECK_THROWS_AS(parse_dem("bogus(0.1) D0\n"), ParseError);
}

TEST_CASE("unsupported instructions are rejected, not ignored") {
  CHECK_THROWS_AS(parse_dem("shift_detectors(0, 0, 1) 3\n"), ParseError);
  CHECK_THROWS_AS(parse_dem("repeat 5 {\n"), ParseError);
  CHECK_THROWS_AS(parse_dem("logical_observable L0\n"), ParseError);
}

TEST_CASE("observable targets parse but are ignored") {
  Dem dem = parse_dem("error(0.25) D1 L0 D2\n");
  REQUIRE(dem.edge_count() == 1);
  CHECK(dem.edge(0) == DetectorSet({1, 2}, 3));
}

TEST_CASE("comments and coordinates") {
  Dem dem = parse_dem(
      "# a comment line\n"
      "detector(1, 2, 3) D0\n"
      "error(0.05) D0  # trailing comment\n");
  CHECK(dem.coords.at(0).x == 1.0);
  CHECK(dem.coords.at(0).y == 2.0);
  CHECK(dem.coords.at(0).t == 3.0);
  CHECK(dem.edge_count() == 1);
}

TEST_CASE("declared detector count bounds indices") {
  CHECK_THROWS_AS(parse_dem("error(0.1) D5\n", 4), ParseError);
  Dem dem = parse_dem("error(0.1) D3\n", 10);
  CHECK(dem.detector_count() == 10);
}

TEST_CASE("writer roundtrips exactly and sorts deterministically") {
  std::mt19937_64 rng(31);
  Dem dem = testing::random_dem(7, 12, 1e-6, 0.49, rng);
  dem.coords.set(0, {0.5, 1.5, 2.0});
  const std::string text = write_dem(dem);
  Dem back = parse_dem(text);
  REQUIRE(back.edge_count() == dem.edge_count());
  for (size_t e = 0; e < dem.edge_count(); ++e) {
    long idx = back.find_edge(dem.edge(e));
    REQUIRE(idx >= 0);
    CHECK(back.rate(static_cast<size_t>(idx)) == dem.rate(e));  // bit-exact
  }
  CHECK(back.coords.at(0).x == 0.5);

  // Output ordering follows the integer view of the detector sets.
  Dem two(3);
  two.add_edge(DetectorSet({2}, 3), 0.25);
  two.add_edge(DetectorSet({0, 1}, 3), 0.125);
  const std::string out = write_dem(two);
  CHECK(out.find("error(0.125) D0 D1") < out.find("error(0.25) D2"));
}

TEST_CASE("empty dem writes a header-only file") {
  Dem dem(4);
  const std::string text = write_dem(dem);
  CHECK(text.find("error(") == std::string::npos);
  Dem back = parse_dem(text);
  CHECK(back.edge_count() == 0);
}
