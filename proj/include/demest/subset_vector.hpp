#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "demest/errors.hpp"

namespace demest {

/// Dense representations are capped at this many detectors; exact pipelines
/// are exponential by nature and larger systems must use the hyperedge-sparse
/// paths.
inline constexpr int kMaxDenseDetectors = 24;

enum class SubsetKind { probability, polarization, depolarization, attenuation, rate };

inline const char* to_string(SubsetKind k) {
  switch (k) {
    case SubsetKind::probability: return "probability";
    case SubsetKind::polarization: return "polarization";
    case SubsetKind::depolarization: return "depolarization";
    case SubsetKind::attenuation: return "attenuation";
    case SubsetKind::rate: return "rate";
  }
  return "?";
}

/// Checks that `size` is a power of two not exceeding 2^kMaxDenseDetectors
/// and returns its log2 (the detector count n).
inline int dense_detector_count(Eigen::Index size) {
  if (size <= 0 || (size & (size - 1)) != 0)
    throw DimensionError("dense subset vector length must be a power of two, got " +
                         std::to_string(size));
  int n = 0;
  while ((Eigen::Index{1} << n) < size) ++n;
  if (n > kMaxDenseDetectors)
    throw DimensionError("dense subset vector capped at n <= " +
                         std::to_string(kMaxDenseDetectors) + ", got n=" +
                         std::to_string(n));
  return n;
}

/// A length-2^n real vector indexed by subset integer, tagged with what the
/// entries mean. The tag-specific invariants are checked on construction.
struct SubsetVector {
  Eigen::VectorXd values;
  SubsetKind kind = SubsetKind::probability;

  SubsetVector() = default;
  SubsetVector(Eigen::VectorXd v, SubsetKind k) : values(std::move(v)), kind(k) {
    validate();
  }

  int detector_count() const { return dense_detector_count(values.size()); }

  void validate() const {
    dense_detector_count(values.size());
    switch (kind) {
      case SubsetKind::probability: {
        if ((values.array() < -1e-12).any() || (values.array() > 1.0 + 1e-12).any())
          throw DomainError("probability vector entries must lie in [0, 1]");
        if (std::fabs(values.sum() - 1.0) > 1e-9)
          throw DomainError("probability vector must sum to 1 within 1e-9, got " +
                            std::to_string(values.sum()));
        break;
      }
      case SubsetKind::polarization:
        if (values[0] != 1.0)
          throw DomainError("polarization vector must have entry 1 at index 0");
        break;
      case SubsetKind::depolarization:
        if (values[0] != 0.0)
          throw DomainError("depolarization vector must have entry 0 at index 0");
        break;
      case SubsetKind::attenuation:
      case SubsetKind::rate:
        break;
    }
  }
};

}  // namespace demest
