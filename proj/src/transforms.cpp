#include "demest/transforms.hpp"

#include <cmath>

namespace demest {

Eigen::VectorXd polarizations_from_probs(const Eigen::VectorXd& probs) {
  Eigen::VectorXd pi = probs;
  hadamard_transform<double>(pi);
  return pi;
}

Eigen::VectorXd attenuations_from_depolarizations(Eigen::VectorXd omega) {
  const double scale = -2.0 / static_cast<double>(omega.size());
  hadamard_transform<double>(omega);
  return scale * omega;
}

Eigen::VectorXd probs_from_attenuations(Eigen::VectorXd psi) {
  // psi[0] is the dependent parameter; with it in place the depolarizations
  // are -H psi / 2 and the zero entry lands exactly at 0.
  psi[0] = -psi.tail(psi.size() - 1).sum();
  hadamard_transform<double>(psi);
  Eigen::VectorXd pi = (0.5 * psi).array().exp();
  hadamard_transform<double>(pi);
  return pi / static_cast<double>(pi.size());
}

Eigen::VectorXd attenuations_from_rates(const Eigen::VectorXd& theta) {
  Eigen::VectorXd psi(theta.size());
  for (Eigen::Index i = 1; i < theta.size(); ++i) {
    if (theta[i] >= 0.5)
      throw DomainError("rate at subset " + std::to_string(i) +
                        " is >= 1/2; attenuation undefined");
    psi[i] = -std::log1p(-2.0 * theta[i]);
  }
  psi[0] = -psi.tail(psi.size() - 1).sum();
  return psi;
}

SubsetVector probs_to_rates(const SubsetVector& probs) {
  if (probs.kind != SubsetKind::probability)
    throw DomainError(std::string("probs_to_rates expects a probability vector, got ") +
                      to_string(probs.kind));
  Eigen::VectorXd pi = polarizations_from_probs(probs.values);
  Eigen::VectorXd omega(pi.size());
  for (Eigen::Index y = 0; y < pi.size(); ++y) {
    if (!(pi[y] > 0.0))
      throw PoleError("polarization of subset " + std::to_string(y) +
                          " is not positive (" + std::to_string(pi[y]) +
                          "); excitation rates undefined",
                      y);
    omega[y] = -std::log(pi[y]);
  }
  Eigen::VectorXd psi = attenuations_from_depolarizations(std::move(omega));
  Eigen::VectorXd theta = 0.5 * (1.0 - (-psi.array()).exp());
  return SubsetVector(std::move(theta), SubsetKind::rate);
}

SubsetVector rates_to_probs(const SubsetVector& rates) {
  if (rates.kind != SubsetKind::rate)
    throw DomainError(std::string("rates_to_probs expects a rate vector, got ") +
                      to_string(rates.kind));
  Eigen::VectorXd p = probs_from_attenuations(attenuations_from_rates(rates.values));
  return SubsetVector(std::move(p), SubsetKind::probability);
}

}  // namespace demest
