#pragma once

#include <cstdint>
#include <vector>

namespace demest {

/// A dense bit matrix over GF(2), rows packed into 64-bit words.
class BitMatrix {
 public:
  BitMatrix(size_t rows, size_t cols)
      : rows_(rows), cols_(cols), words_((cols + 63) / 64),
        data_(rows * words_, 0) {}

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  bool get(size_t r, size_t c) const {
    return (row(r)[c / 64] >> (c % 64)) & 1;
  }
  void set(size_t r, size_t c, bool v = true) {
    if (v)
      row(r)[c / 64] |= uint64_t{1} << (c % 64);
    else
      row(r)[c / 64] &= ~(uint64_t{1} << (c % 64));
  }
  void xor_rows(size_t dst, size_t src) {
    uint64_t* d = row(dst);
    const uint64_t* s = row(src);
    for (size_t w = 0; w < words_; ++w) d[w] ^= s[w];
  }
  void swap_rows(size_t a, size_t b) {
    if (a == b) return;
    uint64_t* ra = row(a);
    uint64_t* rb = row(b);
    for (size_t w = 0; w < words_; ++w) std::swap(ra[w], rb[w]);
  }

  uint64_t* row(size_t r) { return data_.data() + r * words_; }
  const uint64_t* row(size_t r) const { return data_.data() + r * words_; }

 private:
  size_t rows_, cols_, words_;
  std::vector<uint64_t> data_;
};

/// Reduced row echelon form of an augmented system [A | b] over GF(2).
struct Gf2Reduction {
  std::vector<size_t> pivot_cols;  // one per pivot row, increasing
  std::vector<size_t> free_cols;
  bool consistent = true;          // false iff a row reduces to [0...0 | 1]
};

/// In-place RREF. The final column of `m` is treated as the augmented
/// right-hand side and is never chosen as a pivot.
Gf2Reduction gf2_row_reduce(BitMatrix& m);

}  // namespace demest
