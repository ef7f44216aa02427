#include "demest/syndromes.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "demest/parallel.hpp"

namespace demest {

int SyndromeBatch::hamming_weight(size_t s) const {
  const uint64_t* row = shot(s);
  int w = 0;
  for (size_t k = 0; k < stride_; ++k) w += std::popcount(row[k]);
  return w;
}

uint64_t SyndromeBatch::shot_index(size_t s) const {
  if (n_ > 63)
    throw DimensionError("shot_index needs at most 63 detectors, got " +
                         std::to_string(n_));
  return shot(s)[0];
}

SyndromeBatch SyndromeBatch::slice(size_t first_shot, size_t count) const {
  if (first_shot + count > shots_)
    throw DimensionError("slice past the end of the batch");
  SyndromeBatch out(n_, count);
  std::memcpy(out.words_.data(), words_.data() + first_shot * stride_,
              count * stride_ * sizeof(uint64_t));
  return out;
}

SyndromeBatch SyndromeBatch::concat(const SyndromeBatch& a,
                                    const SyndromeBatch& b) {
  if (a.detector_count() != b.detector_count())
    throw DimensionError("cannot concatenate batches with different detector counts");
  SyndromeBatch out(a.detector_count(), a.shot_count() + b.shot_count());
  std::memcpy(out.words_.data(), a.words_.data(),
              a.words_.size() * sizeof(uint64_t));
  std::memcpy(out.words_.data() + a.words_.size(), b.words_.data(),
              b.words_.size() * sizeof(uint64_t));
  return out;
}

void SyndromeBatch::mask_padding() {
  if (stride_ == 0) return;
  const uint32_t used = n_ % 64;
  if (used == 0) return;
  const uint64_t mask = (uint64_t{1} << used) - 1;
  for (size_t s = 0; s < shots_; ++s) shot(s)[stride_ - 1] &= mask;
}

SyndromeFormat syndrome_format_from_name(const std::string& name) {
  if (name == "b8") return SyndromeFormat::b8;
  if (name == "01") return SyndromeFormat::zero_one;
  throw DomainError("unknown syndrome format '" + name + "' (expected b8 or 01)");
}

namespace {

SyndromeBatch read_b8(const std::filesystem::path& path, uint32_t n) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<size_t>(in.tellg());
  in.seekg(0);
  const size_t stride_bytes = (n + 7) / 8;
  if (stride_bytes == 0 || file_size % stride_bytes != 0)
    throw FormatError(path.string() + ": size " + std::to_string(file_size) +
                      " is not a multiple of the " +
                      std::to_string(stride_bytes) + "-byte shot stride");
  const size_t shots = file_size / stride_bytes;
  SyndromeBatch batch(n, shots);
  std::vector<char> row(stride_bytes);
  for (size_t s = 0; s < shots; ++s) {
    in.read(row.data(), static_cast<std::streamsize>(stride_bytes));
    if (!in) throw FormatError(path.string() + ": short read");
    std::memcpy(batch.shot(s), row.data(), stride_bytes);
  }
  batch.mask_padding();
  return batch;
}

SyndromeBatch read_01(const std::filesystem::path& path, uint32_t n) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.size() != n)
      throw FormatError(path.string() + " line " + std::to_string(lineno) +
                        ": expected " + std::to_string(n) +
                        " characters, got " + std::to_string(line.size()));
    for (char c : line)
      if (c != '0' && c != '1')
        throw FormatError(path.string() + " line " + std::to_string(lineno) +
                          ": character '" + std::string(1, c) +
                          "' is not 0 or 1");
    lines.push_back(line);
  }
  SyndromeBatch batch(n, lines.size());
  for (size_t s = 0; s < lines.size(); ++s)
    for (uint32_t k = 0; k < n; ++k)
      if (lines[s][k] == '1') batch.set_bit(s, k);
  return batch;
}

}  // namespace

SyndromeBatch read_syndromes(const std::filesystem::path& path,
                             SyndromeFormat format, uint32_t detector_count) {
  if (detector_count == 0) throw DimensionError("detector count must be positive");
  return format == SyndromeFormat::b8 ? read_b8(path, detector_count)
                                      : read_01(path, detector_count);
}

void write_syndromes(const std::filesystem::path& path,
                     const SyndromeBatch& batch, SyndromeFormat format) {
  const uint32_t n = batch.detector_count();
  if (format == SyndromeFormat::b8) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    const size_t stride_bytes = (n + 7) / 8;
    for (size_t s = 0; s < batch.shot_count(); ++s)
      out.write(reinterpret_cast<const char*>(batch.shot(s)),
                static_cast<std::streamsize>(stride_bytes));
  } else {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    std::string line(n, '0');
    for (size_t s = 0; s < batch.shot_count(); ++s) {
      for (uint32_t k = 0; k < n; ++k) line[k] = batch.bit(s, k) ? '1' : '0';
      out << line << '\n';
    }
  }
}

PoolResult pool_frames(const SyndromeBatch& batch, const FrameSpec& spec) {
  if (spec.rounds_per_frame < 1 || spec.detectors_per_round < 1)
    throw DomainError("pool_frames needs rounds_per_frame >= 1 and detectors_per_round >= 1");
  if (spec.discard_head_rounds < 0 || spec.discard_tail_rounds < 0)
    throw DomainError("discard counts must be non-negative");
  const uint32_t per_round = static_cast<uint32_t>(spec.detectors_per_round);
  if (batch.detector_count() % per_round != 0)
    throw DimensionError("detector count " + std::to_string(batch.detector_count()) +
                         " is not a multiple of detectors_per_round " +
                         std::to_string(per_round));
  const long rounds = batch.detector_count() / per_round;
  const long bulk = rounds - spec.discard_head_rounds - spec.discard_tail_rounds;

  PoolResult result;
  const long frames_per_shot =
      bulk >= spec.rounds_per_frame ? bulk / spec.rounds_per_frame : 0;
  if (frames_per_shot == 0) {
    result.frames = SyndromeBatch(
        static_cast<uint32_t>(spec.rounds_per_frame) * per_round, 0);
    result.empty_output_warning = true;
    return result;
  }

  const uint32_t frame_bits =
      static_cast<uint32_t>(spec.rounds_per_frame) * per_round;
  SyndromeBatch out(frame_bits, batch.shot_count() * frames_per_shot);
  for (size_t s = 0; s < batch.shot_count(); ++s) {
    for (long f = 0; f < frames_per_shot; ++f) {
      const size_t frame = s * frames_per_shot + f;
      const long round0 = spec.discard_head_rounds + f * spec.rounds_per_frame;
      const uint32_t src0 = static_cast<uint32_t>(round0) * per_round;
      for (uint32_t j = 0; j < frame_bits; ++j)
        if (batch.bit(s, src0 + j)) out.set_bit(frame, j);
    }
  }
  result.frames = std::move(out);
  return result;
}

DetectorColumns::DetectorColumns(const SyndromeBatch& batch, int threads)
    : shots_(batch.shot_count()), words_((batch.shot_count() + 63) / 64) {
  const uint32_t n = batch.detector_count();
  data_.assign(static_cast<size_t>(n) * words_, 0);
  // Shots are sparse in practice; walk set bits per word instead of testing
  // every (shot, detector) pair. Blocks of 64 shots touch disjoint column
  // words, so the block loop parallelizes without synchronization.
  const size_t blocks = words_;
  parallel_for(blocks, threads, [&](size_t blk) {
    const size_t shot_begin = blk * 64;
    const size_t shot_end = std::min(shots_, shot_begin + 64);
    for (size_t s = shot_begin; s < shot_end; ++s) {
      const uint64_t* row = batch.shot(s);
      const uint64_t shot_mask = uint64_t{1} << (s % 64);
      for (size_t w = 0; w < batch.words_per_shot(); ++w) {
        uint64_t bits = row[w];
        while (bits) {
          const uint32_t det = static_cast<uint32_t>(w * 64) +
                               static_cast<uint32_t>(std::countr_zero(bits));
          bits &= bits - 1;
          data_[static_cast<size_t>(det) * words_ + blk] |= shot_mask;
        }
      }
    }
  });
}

size_t DetectorColumns::count_all_set(const std::vector<uint32_t>& dets) const {
  if (dets.empty()) return shots_;
  size_t count = 0;
  const uint64_t* first = column(dets[0]);
  for (size_t w = 0; w < words_; ++w) {
    uint64_t acc = first[w];
    for (size_t d = 1; d < dets.size() && acc; ++d) acc &= column(dets[d])[w];
    count += std::popcount(acc);
  }
  return count;
}

size_t DetectorColumns::count_odd_parity(const std::vector<uint32_t>& dets) const {
  if (dets.empty()) return 0;
  size_t count = 0;
  const uint64_t* first = column(dets[0]);
  for (size_t w = 0; w < words_; ++w) {
    uint64_t acc = first[w];
    for (size_t d = 1; d < dets.size(); ++d) acc ^= column(dets[d])[w];
    count += std::popcount(acc);
  }
  return count;
}

}  // namespace demest
