#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "demest/errors.hpp"

namespace demest {

/// A subset of the detectors [0, n). Stores the set view (sorted unique
/// indices); the little-endian bit-vector and integer views are derived.
/// The integer view is the usual subset index: sum of 2^i over members,
/// so inclusion implies integer order (a linear extension of the poset).
class DetectorSet {
 public:
  DetectorSet() = default;

  DetectorSet(std::vector<uint32_t> indices, uint32_t detector_count)
      : indices_(std::move(indices)), n_(detector_count) {
    std::sort(indices_.begin(), indices_.end());
    for (size_t i = 0; i < indices_.size(); ++i) {
      if (indices_[i] >= n_)
        throw DimensionError("detector index " + std::to_string(indices_[i]) +
                             " out of range for n=" + std::to_string(n_));
      if (i > 0 && indices_[i] == indices_[i - 1])
        throw DomainError("duplicate detector index " +
                          std::to_string(indices_[i]));
    }
  }

  DetectorSet(std::initializer_list<uint32_t> indices, uint32_t detector_count)
      : DetectorSet(std::vector<uint32_t>(indices), detector_count) {}

  /// Inverse of subset_index(): bits of `index` select the members.
  static DetectorSet from_index(uint64_t index, uint32_t detector_count) {
    std::vector<uint32_t> ids;
    for (uint32_t i = 0; index != 0; ++i, index >>= 1)
      if (index & 1) ids.push_back(i);
    return DetectorSet(std::move(ids), detector_count);
  }

  const std::vector<uint32_t>& indices() const { return indices_; }
  uint32_t detector_count() const { return n_; }
  uint32_t size() const { return static_cast<uint32_t>(indices_.size()); }
  bool empty() const { return indices_.empty(); }

  bool contains(uint32_t det) const {
    return std::binary_search(indices_.begin(), indices_.end(), det);
  }

  bool is_subset_of(const DetectorSet& other) const {
    return std::includes(other.indices_.begin(), other.indices_.end(),
                         indices_.begin(), indices_.end());
  }

  /// Integer view. Only available when every member is below 64.
  uint64_t subset_index() const {
    uint64_t v = 0;
    for (uint32_t i : indices_) {
      if (i >= 64)
        throw DimensionError("subset index needs detectors below 64, got " +
                             std::to_string(i));
      v |= uint64_t{1} << i;
    }
    return v;
  }

  /// Little-endian bit-vector view of length detector_count().
  std::vector<bool> to_bits() const {
    std::vector<bool> bits(n_, false);
    for (uint32_t i : indices_) bits[i] = true;
    return bits;
  }

  std::string str() const {
    std::string s = "{";
    for (size_t i = 0; i < indices_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(indices_[i]);
    }
    return s + "}";
  }

  bool operator==(const DetectorSet& other) const {
    return n_ == other.n_ && indices_ == other.indices_;
  }
  bool operator!=(const DetectorSet& other) const { return !(*this == other); }

 private:
  std::vector<uint32_t> indices_;
  uint32_t n_ = 0;
};

/// |A ∩ B| mod 2, the bit-wise product of the two sets' bit-vectors.
inline int bitdot(const DetectorSet& a, const DetectorSet& b) {
  if (a.detector_count() != b.detector_count())
    throw DimensionError("bitdot needs equal detector counts, got " +
                         std::to_string(a.detector_count()) + " and " +
                         std::to_string(b.detector_count()));
  int parity = 0;
  auto ia = a.indices().begin(), ea = a.indices().end();
  auto ib = b.indices().begin(), eb = b.indices().end();
  while (ia != ea && ib != eb) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      parity ^= 1;
      ++ia;
      ++ib;
    }
  }
  return parity;
}

inline DetectorSet set_union(const DetectorSet& a, const DetectorSet& b) {
  std::vector<uint32_t> out;
  std::set_union(a.indices().begin(), a.indices().end(), b.indices().begin(),
                 b.indices().end(), std::back_inserter(out));
  return DetectorSet(std::move(out), a.detector_count());
}

inline DetectorSet set_intersection(const DetectorSet& a,
                                    const DetectorSet& b) {
  std::vector<uint32_t> out;
  std::set_intersection(a.indices().begin(), a.indices().end(),
                        b.indices().begin(), b.indices().end(),
                        std::back_inserter(out));
  return DetectorSet(std::move(out), a.detector_count());
}

inline bool intersects(const DetectorSet& a, const DetectorSet& b) {
  auto ia = a.indices().begin(), ea = a.indices().end();
  auto ib = b.indices().begin(), eb = b.indices().end();
  while (ia != ea && ib != eb) {
    if (*ia < *ib)
      ++ia;
    else if (*ib < *ia)
      ++ib;
    else
      return true;
  }
  return false;
}

/// Compares the integer views without materializing them, so it works for
/// any detector count: the set with the larger top element is larger, ties
/// recurse downward.
inline bool linear_extension_less(const DetectorSet& a, const DetectorSet& b) {
  auto ia = a.indices().rbegin(), ea = a.indices().rend();
  auto ib = b.indices().rbegin(), eb = b.indices().rend();
  while (ia != ea && ib != eb) {
    if (*ia != *ib) return *ia < *ib;
    ++ia;
    ++ib;
  }
  return ia == ea && ib != eb;
}

struct DetectorSetHash {
  size_t operator()(const DetectorSet& s) const noexcept {
    size_t h = std::hash<uint32_t>{}(s.detector_count());
    for (uint32_t x : s.indices())
      h ^= std::hash<uint32_t>{}(x) + 0x9e3779b97f4a7c15ULL + (h << 6) +
           (h >> 2);
    return h;
  }
};

}  // namespace demest
