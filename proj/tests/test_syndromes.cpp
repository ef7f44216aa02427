#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "demest/syndromes.hpp"

using namespace demest;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("demest_test_" + name);
}

}  // namespace

TEST_CASE("b8 read: two low bits of one byte") {
  auto path = temp_file("two_bits.b8");
  {
    std::ofstream out(path, std::ios::binary);
    char byte = 0x03;
    out.write(&byte, 1);
  }
  SyndromeBatch batch = read_syndromes(path, SyndromeFormat::b8, 2);
  REQUIRE(batch.shot_count() == 1);
  CHECK(batch.bit(0, 0));
  CHECK(batch.bit(0, 1));
  fs::remove(path);
}

TEST_CASE("01 read: lines become shots") {
  auto path = temp_file("lines.01");
  {
    std::ofstream out(path);
    out << "01\n10\n";
  }
  SyndromeBatch batch = read_syndromes(path, SyndromeFormat::zero_one, 2);
  REQUIRE(batch.shot_count() == 2);
  CHECK(!batch.bit(0, 0));
  CHECK(batch.bit(0, 1));
  CHECK(batch.bit(1, 0));
  CHECK(!batch.bit(1, 1));
  fs::remove(path);
}

TEST_CASE("syndrome files reject malformed input") {
  auto bad_size = temp_file("bad_size.b8");
  {
    std::ofstream out(bad_size, std::ios::binary);
    const char bytes[3] = {0, 0, 0};
    out.write(bytes, 3);
  }
  // 9 detectors need 2 bytes per shot; 3 bytes is not a multiple.
  CHECK_THROWS_AS(read_syndromes(bad_size, SyndromeFormat::b8, 9), FormatError);
  fs::remove(bad_size);

  auto bad_char = temp_file("bad_char.01");
  {
    std::ofstream out(bad_char);
    out << "0x\n";
  }
  CHECK_THROWS_AS(read_syndromes(bad_char, SyndromeFormat::zero_one, 2), FormatError);
  fs::remove(bad_char);
}

TEST_CASE("write-then-read roundtrips in both formats") {
  std::mt19937_64 rng(21);
  SyndromeBatch batch(77, 500);
  for (size_t s = 0; s < batch.shot_count(); ++s)
    for (uint32_t d = 0; d < batch.detector_count(); ++d)
      if (rng() % 7 == 0) batch.set_bit(s, d);

  for (auto format : {SyndromeFormat::b8, SyndromeFormat::zero_one}) {
    auto path = temp_file(format == SyndromeFormat::b8 ? "rt.b8" : "rt.01");
    write_syndromes(path, batch, format);
    SyndromeBatch back = read_syndromes(path, format, batch.detector_count());
    REQUIRE(back.shot_count() == batch.shot_count());
    bool equal = true;
    for (size_t s = 0; s < batch.shot_count(); ++s)
      for (uint32_t d = 0; d < batch.detector_count(); ++d)
        equal = equal && back.bit(s, d) == batch.bit(s, d);
    CHECK(equal);
    fs::remove(path);
  }
}

TEST_CASE("pool_frames drops head, tail and leftovers") {
  // 13 rounds of 3 detectors; values encode (shot, round) for bookkeeping.
  const int rounds = 13, per_round = 3;
  SyndromeBatch batch(rounds * per_round, 4);
  for (size_t s = 0; s < 4; ++s)
    for (int r = 0; r < rounds; ++r)
      for (int d = 0; d < per_round; ++d)
        if ((s + r + d) % 3 == 0)
          batch.set_bit(s, static_cast<uint32_t>(r * per_round + d));

  FrameSpec spec;
  spec.rounds_per_frame = 2;
  spec.detectors_per_round = per_round;
  PoolResult result = pool_frames(batch, spec);
  CHECK(!result.empty_output_warning);
  // 13 - 1 - 1 = 11 bulk rounds -> floor(11/2) = 5 frames per shot.
  CHECK(result.frames.shot_count() == 4 * 5);
  CHECK(result.frames.detector_count() == 2 * per_round);

  // Frame bit j equals the original detector at
  // (head + frame * r) * per_round + j.
  for (size_t s = 0; s < 4; ++s)
    for (int f = 0; f < 5; ++f)
      for (uint32_t j = 0; j < 6; ++j) {
        const uint32_t src = static_cast<uint32_t>((1 + f * 2) * per_round) + j;
        CHECK(result.frames.bit(s * 5 + f, j) == batch.bit(s, src));
      }
}

TEST_CASE("pool_frames single-frame and empty cases") {
  SyndromeBatch batch(5 * 2, 3);
  FrameSpec spec;
  spec.detectors_per_round = 2;
  spec.rounds_per_frame = 3;  // equals the bulk round count
  PoolResult one = pool_frames(batch, spec);
  CHECK(one.frames.shot_count() == 3);
  CHECK(!one.empty_output_warning);

  spec.rounds_per_frame = 4;  // more than the 3 bulk rounds
  PoolResult none = pool_frames(batch, spec);
  CHECK(none.frames.shot_count() == 0);
  CHECK(none.empty_output_warning);
}

TEST_CASE("detector columns count moments and parities") {
  std::mt19937_64 rng(23);
  SyndromeBatch batch(9, 1000);
  for (size_t s = 0; s < batch.shot_count(); ++s)
    for (uint32_t d = 0; d < 9; ++d)
      if (rng() % 4 == 0) batch.set_bit(s, d);

  DetectorColumns columns(batch, 2);
  std::vector<uint32_t> subset{1, 4, 7};
  size_t expect_all = 0, expect_odd = 0;
  for (size_t s = 0; s < batch.shot_count(); ++s) {
    int count = 0;
    for (uint32_t d : subset) count += batch.bit(s, d) ? 1 : 0;
    if (count == 3) ++expect_all;
    if (count % 2) ++expect_odd;
  }
  CHECK(columns.count_all_set(subset) == expect_all);
  CHECK(columns.count_odd_parity(subset) == expect_odd);
  CHECK(columns.count_all_set({}) == batch.shot_count());
  CHECK(columns.count_odd_parity({}) == 0);
}

TEST_CASE("slice and concat preserve shots") {
  SyndromeBatch batch(70, 10);
  for (size_t s = 0; s < 10; ++s) batch.set_bit(s, static_cast<uint32_t>(s * 7 % 70));
  SyndromeBatch head = batch.slice(0, 4);
  SyndromeBatch tail = batch.slice(4, 6);
  SyndromeBatch glued = SyndromeBatch::concat(head, tail);
  REQUIRE(glued.shot_count() == 10);
  for (size_t s = 0; s < 10; ++s)
    CHECK(glued.bit(s, static_cast<uint32_t>(s * 7 % 70)));
}
