#include "localdrop/linalg.hpp"

#include <stdexcept>
#include <string>

namespace localdrop::linalg {

namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

void check_matmul_shapes(const Matrix& x, const Matrix& y) {
  if (x.cols != y.rows) {
    throw std::invalid_argument("matmul: inner dims disagree, " + shape_str(x) +
                                " * " + shape_str(y));
  }
}

void check_same_shape(const char* op, const Matrix& x, const Matrix& y) {
  if (!x.same_shape(y)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_str(x) + " vs " + shape_str(y));
  }
}

void check_conv_shapes(const Matrix& x, const Matrix& k) {
  if (k.rows < 1 || k.cols < 1 || k.rows > x.rows || k.cols > x.cols) {
    throw std::invalid_argument("conv2d_valid: kernel " + shape_str(k) +
                                " does not fit input " + shape_str(x));
  }
}

}  // namespace

Matrix matmul(const Matrix& x, const Matrix& y) {
  check_matmul_shapes(x, y);
  Matrix out(x.rows, y.cols);
  const int n = x.rows, kk = x.cols, m = y.cols;
  // Each out(i,j) accumulates over k in ascending order on one thread, so the
  // result is independent of the thread count.
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double* orow = &out.a[static_cast<std::size_t>(i) * m];
    const double* xrow = &x.a[static_cast<std::size_t>(i) * kk];
    for (int k = 0; k < kk; ++k) {
      const double xv = xrow[k];
      const double* yrow = &y.a[static_cast<std::size_t>(k) * m];
      for (int j = 0; j < m; ++j) orow[j] += xv * yrow[j];
    }
  }
  return out;
}

Matrix hadamard(const Matrix& x, const Matrix& y) {
  check_same_shape("hadamard", x, y);
  Matrix out(x.rows, x.cols);
  const long long total = static_cast<long long>(x.a.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < total; ++i) out.a[i] = x.a[i] * y.a[i];
  return out;
}

Matrix transpose(const Matrix& x) {
  Matrix out(x.cols, x.rows);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < x.rows; ++i) {
    for (int j = 0; j < x.cols; ++j) out(j, i) = x(i, j);
  }
  return out;
}

Matrix conv2d_valid(const Matrix& x, const Matrix& kernel) {
  check_conv_shapes(x, kernel);
  const int oh = x.rows - kernel.rows + 1;
  const int ow = x.cols - kernel.cols + 1;
  Matrix out(oh, ow);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int kr = 0; kr < kernel.rows; ++kr) {
        const double* xrow = &x.a[static_cast<std::size_t>(r + kr) * x.cols + c];
        const double* krow = &kernel.a[static_cast<std::size_t>(kr) * kernel.cols];
        for (int kc = 0; kc < kernel.cols; ++kc) acc += xrow[kc] * krow[kc];
      }
      out(r, c) = acc;
    }
  }
  return out;
}

namespace reference {

Matrix matmul(const Matrix& x, const Matrix& y) {
  check_matmul_shapes(x, y);
  Matrix out(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i) {
    for (int k = 0; k < x.cols; ++k) {
      const double xv = x(i, k);
      for (int j = 0; j < y.cols; ++j) out(i, j) += xv * y(k, j);
    }
  }
  return out;
}

Matrix hadamard(const Matrix& x, const Matrix& y) {
  check_same_shape("hadamard", x, y);
  Matrix out(x.rows, x.cols);
  for (std::size_t i = 0; i < x.a.size(); ++i) out.a[i] = x.a[i] * y.a[i];
  return out;
}

Matrix conv2d_valid(const Matrix& x, const Matrix& kernel) {
  check_conv_shapes(x, kernel);
  const int oh = x.rows - kernel.rows + 1;
  const int ow = x.cols - kernel.cols + 1;
  Matrix out(oh, ow);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int kr = 0; kr < kernel.rows; ++kr) {
        for (int kc = 0; kc < kernel.cols; ++kc) {
          acc += x(r + kr, c + kc) * kernel(kr, kc);
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace reference

}  // namespace localdrop::linalg
