#include "demest/gf2.hpp"

namespace demest {

Gf2Reduction gf2_row_reduce(BitMatrix& m) {
  Gf2Reduction red;
  const size_t cols = m.cols() - 1;  // last column is the RHS
  std::vector<bool> is_pivot(cols, false);
  size_t pivot_row = 0;
  for (size_t c = 0; c < cols && pivot_row < m.rows(); ++c) {
    size_t r = pivot_row;
    while (r < m.rows() && !m.get(r, c)) ++r;
    if (r == m.rows()) continue;
    m.swap_rows(pivot_row, r);
    for (size_t rr = 0; rr < m.rows(); ++rr)
      if (rr != pivot_row && m.get(rr, c)) m.xor_rows(rr, pivot_row);
    red.pivot_cols.push_back(c);
    is_pivot[c] = true;
    ++pivot_row;
  }
  for (size_t c = 0; c < cols; ++c)
    if (!is_pivot[c]) red.free_cols.push_back(c);
  for (size_t r = pivot_row; r < m.rows(); ++r)
    if (m.get(r, cols)) red.consistent = false;
  return red;
}

}  // namespace demest
