#include <doctest.h>

#include "demest/bits.hpp"

using namespace demest;

TEST_CASE("detector set views agree") {
  DetectorSet s({0, 3, 5}, 8);
  CHECK(s.subset_index() == 0b101001);
  CHECK(s.size() == 3);
  CHECK(s.contains(3));
  CHECK(!s.contains(1));
  auto bits = s.to_bits();
  CHECK(bits == std::vector<bool>{1, 0, 0, 1, 0, 1, 0, 0});
  CHECK(DetectorSet::from_index(0b101001, 8) == s);
}

TEST_CASE("detector set rejects bad input") {
  CHECK_THROWS_AS(DetectorSet({9}, 8), DimensionError);
  CHECK_THROWS_AS(DetectorSet({1, 1}, 8), DomainError);
}

TEST_CASE("bitdot") {
  CHECK(bitdot(DetectorSet({0, 1}, 4), DetectorSet({1, 2}, 4)) == 1);
  CHECK(bitdot(DetectorSet({}, 4), DetectorSet({0, 1, 2, 3}, 4)) == 0);
  CHECK(bitdot(DetectorSet({0, 2}, 4), DetectorSet({0, 2}, 4)) == 0);
  CHECK_THROWS_AS(bitdot(DetectorSet({0}, 4), DetectorSet({0}, 5)), DimensionError);
}

TEST_CASE("inclusion implies integer order") {
  // A subset of B implies integer(A) <= integer(B); spot-check exhaustively
  // for n = 6 through the comparator.
  for (uint64_t a = 0; a < 64; ++a) {
    for (uint64_t b = 0; b < 64; ++b) {
      if ((a & b) == a && a != b) {
        CHECK(linear_extension_less(DetectorSet::from_index(a, 6),
                                    DetectorSet::from_index(b, 6)));
      }
      const bool lt = linear_extension_less(DetectorSet::from_index(a, 6),
                                            DetectorSet::from_index(b, 6));
      CHECK(lt == (a < b));
    }
  }
}

TEST_CASE("linear extension comparator works past 64 detectors") {
  DetectorSet a({100, 2}, 200);
  DetectorSet b({101}, 200);
  CHECK(linear_extension_less(a, b));
  CHECK(!linear_extension_less(b, a));
}
