#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ntfdm {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = (*this)(r, c);
    return out;
  }
};

/// Dense third-order array with the last index fastest: (i, j, m) -> (i*dim1 + j)*dim2 + m.
struct Tensor3 {
  std::size_t dim0 = 0;
  std::size_t dim1 = 0;
  std::size_t dim2 = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(std::size_t a, std::size_t b, std::size_t c, double fill = 0.0)
      : dim0(a), dim1(b), dim2(c), data(a * b * c, fill) {}

  double& operator()(std::size_t i, std::size_t j, std::size_t m) {
    return data[(i * dim1 + j) * dim2 + m];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t m) const {
    return data[(i * dim1 + j) * dim2 + m];
  }
  /// The dim2-long fibre at (i, j).
  std::span<const double> fibre(std::size_t i, std::size_t j) const {
    return {data.data() + (i * dim1 + j) * dim2, dim2};
  }
};

}  // namespace ntfdm
