#pragma once

#include <Eigen/Core>
#include <string>

#include "demest/errors.hpp"
#include "demest/subset_vector.hpp"

namespace demest {

/// In-place fast Walsh-Hadamard transform: out[y] = sum_x (-1)^{x.y} in[x].
/// Unnormalized, so applying it twice multiplies by 2^n.
template <class Scalar>
void hadamard_transform(Eigen::Ref<Eigen::Vector<Scalar, Eigen::Dynamic>> v) {
  const Eigen::Index size = v.size();
  if (size <= 0 || (size & (size - 1)) != 0)
    throw DimensionError("hadamard_transform needs a power-of-two length, got " +
                         std::to_string(size));
  for (Eigen::Index stride = 1; stride < size; stride <<= 1) {
    for (Eigen::Index base = 0; base < size; base += 2 * stride) {
      for (Eigen::Index j = base; j < base + stride; ++j) {
        Scalar lo = v[j];
        Scalar hi = v[j + stride];
        v[j] = lo + hi;
        v[j + stride] = lo - hi;
      }
    }
  }
}

/// theta = 1/2 (1 - exp(-psi)) with psi = (-2/2^n) H[-ln(H p)].
/// Entry 0 carries the dependent free parameter (minus the total
/// attenuation run through the same map). Throws PoleError when any
/// polarization H p is not strictly positive.
SubsetVector probs_to_rates(const SubsetVector& probs);

/// p = 2^{-n} H[exp(1/2 H[-ln(1 - 2 theta)])]. Entry 0 of the rate vector is
/// ignored and recomputed from the attenuations of the other entries.
/// Throws DomainError when any rate (index > 0) reaches 1/2.
SubsetVector rates_to_probs(const SubsetVector& rates);

/// The five pipeline stages on raw vectors, exposed for reuse.
/// Attenuations use the dense convention psi[0] = -sum_{s != 0} psi[s].
Eigen::VectorXd polarizations_from_probs(const Eigen::VectorXd& probs);
Eigen::VectorXd attenuations_from_depolarizations(Eigen::VectorXd omega);
Eigen::VectorXd probs_from_attenuations(Eigen::VectorXd psi);
Eigen::VectorXd attenuations_from_rates(const Eigen::VectorXd& theta);

}  // namespace demest
