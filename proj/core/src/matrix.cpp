#include "palign/matrix.hpp"

#include <algorithm>
#include <string>

#include "palign/error.hpp"

namespace palign {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    raise(ErrorKind::dimension, "matrix of shape [" + std::to_string(rows) + ", " +
                                    std::to_string(cols) + "] needs " +
                                    std::to_string(rows * cols) + " values, got " +
                                    std::to_string(values_.size()));
  }
}

Matrix Matrix::permute_rows(std::span<const std::size_t> order) const {
  if (order.size() != rows_) {
    raise(ErrorKind::dimension, "row permutation length does not match row count");
  }
  Matrix out(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    if (order[r] >= rows_) raise(ErrorKind::index, "row permutation index out of range");
    std::ranges::copy(row(order[r]), out.row(r).begin());
  }
  return out;
}

}  // namespace palign
