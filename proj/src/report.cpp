#include "demest/report.hpp"

#include <cmath>

#include "demest/errors.hpp"

namespace demest {

EstimateReport floor_negative_rates(EstimateReport report) {
  if (report.sigma.size() != report.theta.size())
    throw DomainError("floor_negative_rates needs per-edge standard errors");
  for (Eigen::Index i = 0; i < report.theta.size(); ++i) {
    if (report.theta[i] < 0.0) {
      report.theta[i] = report.sigma[i];
      if (report.psi.size() == report.theta.size())
        report.psi[i] = -std::log1p(-2.0 * report.theta[i]);
    }
  }
  report.physical = true;
  for (Eigen::Index i = 0; i < report.theta.size(); ++i)
    if (report.theta[i] < 0.0 || report.theta[i] >= 0.5) report.physical = false;
  return report;
}

}  // namespace demest
