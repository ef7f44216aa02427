#pragma once

#include <Eigen/Core>
#include <bit>
#include <cstdint>
#include <string>

#include "demest/errors.hpp"

namespace demest {

/// The 2^n x 2^n subset matrices relating attenuations, depolarizations and
/// probabilities. G is diagonal with -2^{|I|}/2 (Gould's sequence scaled by
/// -1/2), Z is the zeta function of the Boolean poset, L its signed inverse,
/// H the Hadamard matrix, and W the binary Walsh matrix |I cap J| mod 2.
enum class SubsetMatrix { G, Z, L, H, W };

SubsetMatrix subset_matrix_from_name(const std::string& name);

namespace detail {

template <class Scalar>
Scalar subset_matrix_entry(SubsetMatrix m, uint64_t i, uint64_t j) {
  switch (m) {
    case SubsetMatrix::G:
      return i == j ? Scalar(-0.5) * Scalar(uint64_t{1} << std::popcount(i))
                    : Scalar(0);
    case SubsetMatrix::Z:
      return Scalar((i & j) == i ? 1 : 0);
    case SubsetMatrix::L:
      return (j & i) == j ? Scalar(std::popcount(j) % 2 ? -1 : 1) : Scalar(0);
    case SubsetMatrix::H:
      return Scalar(std::popcount(i & j) % 2 ? -1 : 1);
    case SubsetMatrix::W:
      return Scalar(std::popcount(i & j) % 2);
  }
  return Scalar(0);
}

}  // namespace detail

/// Dense construction straight from the entry formula.
template <class Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> subset_matrix(
    SubsetMatrix m, int n) {
  if (n < 0 || n > 12)
    throw DimensionError("subset matrices supported for 0 <= n <= 12, got " +
                         std::to_string(n));
  const Eigen::Index size = Eigen::Index{1} << n;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(size, size);
  for (Eigen::Index i = 0; i < size; ++i)
    for (Eigen::Index j = 0; j < size; ++j)
      out(i, j) = detail::subset_matrix_entry<Scalar>(
          m, static_cast<uint64_t>(i), static_cast<uint64_t>(j));
  return out;
}

/// Dense construction by the 2x2 block recursions, for cross-checking the
/// entry formulas.
template <class Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> subset_matrix_recursive(
    SubsetMatrix m, int n) {
  if (n < 0 || n > 12)
    throw DimensionError("subset matrices supported for 0 <= n <= 12, got " +
                         std::to_string(n));
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat cur(1, 1);
  switch (m) {
    case SubsetMatrix::G: cur(0, 0) = Scalar(-0.5); break;
    case SubsetMatrix::W: cur(0, 0) = Scalar(0); break;
    default: cur(0, 0) = Scalar(1); break;
  }
  for (int level = 0; level < n; ++level) {
    const Eigen::Index s = cur.rows();
    Mat next(2 * s, 2 * s);
    switch (m) {
      case SubsetMatrix::G:
        next.setZero();
        next.topLeftCorner(s, s) = cur;
        next.bottomRightCorner(s, s) = Scalar(2) * cur;
        break;
      case SubsetMatrix::Z:
        next.topLeftCorner(s, s) = cur;
        next.topRightCorner(s, s) = cur;
        next.bottomLeftCorner(s, s).setZero();
        next.bottomRightCorner(s, s) = cur;
        break;
      case SubsetMatrix::L:
        next.topLeftCorner(s, s) = cur;
        next.topRightCorner(s, s).setZero();
        next.bottomLeftCorner(s, s) = cur;
        next.bottomRightCorner(s, s) = -cur;
        break;
      case SubsetMatrix::H:
        next.topLeftCorner(s, s) = cur;
        next.topRightCorner(s, s) = cur;
        next.bottomLeftCorner(s, s) = cur;
        next.bottomRightCorner(s, s) = -cur;
        break;
      case SubsetMatrix::W:
        next.topLeftCorner(s, s) = cur;
        next.topRightCorner(s, s) = cur;
        next.bottomLeftCorner(s, s) = cur;
        // 1 xor W flips each entry of the binary matrix.
        next.bottomRightCorner(s, s) =
            Mat::Ones(s, s) - cur;
        break;
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace demest
