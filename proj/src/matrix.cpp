#include "localdrop/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace localdrop::linalg {

Matrix::Matrix(int r, int c) : rows(r), cols(c) {
  if (r < 0 || c < 0) {
    throw std::invalid_argument("Matrix: negative dims " + std::to_string(r) +
                                "x" + std::to_string(c));
  }
  a.assign(static_cast<std::size_t>(r) * c, 0.0);
}

Matrix::Matrix(int r, int c, std::vector<double> data) : rows(r), cols(c), a(std::move(data)) {
  if (r < 0 || c < 0 || a.size() != static_cast<std::size_t>(r) * c) {
    throw std::invalid_argument("Matrix: data length " + std::to_string(a.size()) +
                                " does not match " + std::to_string(r) + "x" +
                                std::to_string(c));
  }
  for (double v : a) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("Matrix: non-finite entry");
    }
  }
}

Matrix identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool all_finite(const Matrix& m) {
  for (double v : m.a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.a) s += v * v;
  return std::sqrt(s);
}

double max_abs_diff(const Matrix& x, const Matrix& y) {
  if (!x.same_shape(y)) {
    throw std::invalid_argument("max_abs_diff: shape mismatch " +
                                std::to_string(x.rows) + "x" + std::to_string(x.cols) +
                                " vs " + std::to_string(y.rows) + "x" +
                                std::to_string(y.cols));
  }
  double d = 0.0;
  for (std::size_t i = 0; i < x.a.size(); ++i) {
    d = std::max(d, std::abs(x.a[i] - y.a[i]));
  }
  return d;
}

}  // namespace localdrop::linalg
