#pragma once

#include <cstddef>
#include <vector>

namespace localdrop::linalg {

// Dense row-major float64 matrix. Constructing from data validates that every
// entry is finite, so code taking a Matrix may assume no NaN/Inf slipped in.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c);                            // zero-filled
  Matrix(int r, int c, std::vector<double> data);  // checks length and finiteness

  double& operator()(int i, int j) {
    return a[static_cast<std::size_t>(i) * cols + j];
  }
  double operator()(int i, int j) const {
    return a[static_cast<std::size_t>(i) * cols + j];
  }

  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

Matrix identity(int n);
bool all_finite(const Matrix& m);
double frobenius_norm(const Matrix& m);
double max_abs_diff(const Matrix& x, const Matrix& y);

// a = u * diag(sigma) * v^T with u m x r, v n x r, r = min(m, n).
// sigma is nonincreasing and nonnegative; trailing zeros are allowed.
struct SvdFactors {
  Matrix u;
  std::vector<double> sigma;
  Matrix v;
};

}  // namespace localdrop::linalg
