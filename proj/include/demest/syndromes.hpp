#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "demest/bits.hpp"
#include "demest/errors.hpp"

namespace demest {

/// N packed n-bit syndromes, one row per shot. Bit k of a shot lives in
/// word k/64, bit k%64 (little-endian throughout). Immutable once filled.
class SyndromeBatch {
 public:
  SyndromeBatch() = default;
  SyndromeBatch(uint32_t detector_count, size_t shots)
      : n_(detector_count),
        shots_(shots),
        stride_((detector_count + 63) / 64),
        words_(stride_ * shots, 0) {}

  uint32_t detector_count() const { return n_; }
  size_t shot_count() const { return shots_; }
  size_t words_per_shot() const { return stride_; }

  const uint64_t* shot(size_t s) const { return words_.data() + s * stride_; }
  uint64_t* shot(size_t s) { return words_.data() + s * stride_; }

  bool bit(size_t s, uint32_t det) const {
    return (shot(s)[det / 64] >> (det % 64)) & 1;
  }
  void set_bit(size_t s, uint32_t det, bool value = true) {
    uint64_t mask = uint64_t{1} << (det % 64);
    if (value)
      shot(s)[det / 64] |= mask;
    else
      shot(s)[det / 64] &= ~mask;
  }
  void xor_bit(size_t s, uint32_t det) {
    shot(s)[det / 64] ^= uint64_t{1} << (det % 64);
  }

  int hamming_weight(size_t s) const;

  /// Subset-integer view of one shot; needs n <= 63.
  uint64_t shot_index(size_t s) const;

  SyndromeBatch slice(size_t first_shot, size_t count) const;
  static SyndromeBatch concat(const SyndromeBatch& a, const SyndromeBatch& b);

  /// Zeroes any padding bits above detector_count() in the top word.
  void mask_padding();

 private:
  uint32_t n_ = 0;
  size_t shots_ = 0;
  size_t stride_ = 0;
  std::vector<uint64_t> words_;
};

enum class SyndromeFormat { b8, zero_one };

SyndromeFormat syndrome_format_from_name(const std::string& name);

/// b8: each shot occupies ceil(n/8) bytes, detector k at bit k%8 of byte
/// k/8, bit 0 least significant. 01: one ASCII '0'/'1' line of length n per
/// shot. The shot count is inferred from the file.
SyndromeBatch read_syndromes(const std::filesystem::path& path,
                             SyndromeFormat format, uint32_t detector_count);
void write_syndromes(const std::filesystem::path& path,
                     const SyndromeBatch& batch, SyndromeFormat format);

/// Round framing for pooling multi-round shots into fixed-round frames.
struct FrameSpec {
  int rounds_per_frame = 1;
  int detectors_per_round = 1;
  int discard_head_rounds = 1;
  int discard_tail_rounds = 1;
};

struct PoolResult {
  SyndromeBatch frames;
  bool empty_output_warning = false;  // bulk rounds < rounds_per_frame
};

/// Splits every shot into non-overlapping r-round frames after dropping the
/// head/tail rounds; leftover rounds at the end of each shot are dropped.
PoolResult pool_frames(const SyndromeBatch& batch, const FrameSpec& spec);

/// Detector-major transpose of a batch: column i is an N-bit vector of
/// detector i over shots. Built once, read from many threads.
class DetectorColumns {
 public:
  DetectorColumns(const SyndromeBatch& batch, int threads = 0);

  size_t shot_count() const { return shots_; }
  size_t words_per_column() const { return words_; }
  const uint64_t* column(uint32_t det) const {
    return data_.data() + static_cast<size_t>(det) * words_;
  }

  /// popcount of the AND of the listed columns: #{shots with all bits set}.
  size_t count_all_set(const std::vector<uint32_t>& dets) const;
  /// popcount of the XOR of the listed columns: sum over shots of x.b.
  size_t count_odd_parity(const std::vector<uint32_t>& dets) const;

 private:
  size_t shots_ = 0;
  size_t words_ = 0;
  std::vector<uint64_t> data_;
};

}  // namespace demest
