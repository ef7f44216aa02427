#include "demest/matrices.hpp"

namespace demest {

SubsetMatrix subset_matrix_from_name(const std::string& name) {
  if (name == "G") return SubsetMatrix::G;
  if (name == "Z") return SubsetMatrix::Z;
  if (name == "L") return SubsetMatrix::L;
  if (name == "H") return SubsetMatrix::H;
  if (name == "W") return SubsetMatrix::W;
  throw DomainError("unknown subset matrix '" + name + "' (expected G, Z, L, H or W)");
}

}  // namespace demest
