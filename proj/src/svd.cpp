#include "localdrop/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace localdrop::linalg {

namespace {

constexpr double kOffdiagTol = 1e-12;  // relative Gram off-diagonal
constexpr int kMaxSweeps = 100;
constexpr double kRankTolFactor = 1e-10;

double dot(const double* x, const double* y, int len) {
  double s = 0.0;
  for (int i = 0; i < len; ++i) s += x[i] * y[i];
  return s;
}

// The iteration keeps the factor candidates transposed: `cols` holds the
// columns of the matrix being orthogonalized as contiguous rows (n rows of
// length m), and `vt` holds the columns of V the same way (n rows of length
// n). A pair rotation then touches two contiguous rows of each.
struct JacobiState {
  Matrix cols;  // n x m
  Matrix vt;    // n x n
};

// Rotate the (p,q) column pair to zero their Gram entry; returns the relative
// off-diagonal size found before rotating.
double rotate_pair(JacobiState& st, int p, int q) {
  const int m = st.cols.cols;
  const int n = st.vt.cols;
  double* wp = &st.cols.a[static_cast<std::size_t>(p) * m];
  double* wq = &st.cols.a[static_cast<std::size_t>(q) * m];
  const double app = dot(wp, wp, m);
  const double aqq = dot(wq, wq, m);
  if (app == 0.0 || aqq == 0.0) return 0.0;
  const double apq = dot(wp, wq, m);
  const double rel = std::abs(apq) / std::sqrt(app * aqq);
  if (rel <= kOffdiagTol) return rel;

  const double zeta = (aqq - app) / (2.0 * apq);
  const double t =
      (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = c * t;
  for (int i = 0; i < m; ++i) {
    const double a = wp[i], b = wq[i];
    wp[i] = c * a - s * b;
    wq[i] = s * a + c * b;
  }
  double* vp = &st.vt.a[static_cast<std::size_t>(p) * n];
  double* vq = &st.vt.a[static_cast<std::size_t>(q) * n];
  for (int i = 0; i < n; ++i) {
    const double a = vp[i], b = vq[i];
    vp[i] = c * a - s * b;
    vq[i] = s * a + c * b;
  }
  return rel;
}

// Round-robin sweep order: every round is a perfect matching of the columns,
// so the pairs of one round touch disjoint rows and can run in parallel with
// a thread-count-independent result.
void jacobi_sweeps(JacobiState& st) {
  const int n = st.vt.rows;
  if (n < 2) return;
  const int np = (n % 2 == 0) ? n : n + 1;  // pad with a sit-out slot
  double residual = 0.0;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double sweep_max = 0.0;
    for (int round = 0; round < np - 1; ++round) {
      const int half = np / 2;
#pragma omp parallel for schedule(static) reduction(max : sweep_max)
      for (int i = 0; i < half; ++i) {
        // circle method: slot 0 is fixed, the rest rotate by `round`
        const int a = (i == 0) ? 0 : (i - 1 + round) % (np - 1) + 1;
        const int b = (np - 1 - i - 1 + round) % (np - 1) + 1;
        if (a >= n || b >= n) continue;  // sit-out slot when n is odd
        const double rel = rotate_pair(st, std::min(a, b), std::max(a, b));
        sweep_max = std::max(sweep_max, rel);
      }
    }
    residual = sweep_max;
    if (sweep_max < kOffdiagTol) return;
  }
  std::ostringstream msg;
  msg << "svd: no convergence after " << kMaxSweeps << " sweeps (residual "
      << residual << ")";
  throw std::runtime_error(msg.str());
}

// Read sigma off the orthogonalized columns, sort nonincreasing, normalize U,
// and fill any zero-sigma U columns with an orthonormal completion.
SvdFactors assemble(const JacobiState& st) {
  const int n = st.cols.rows;  // number of columns of the original matrix
  const int m = st.cols.cols;  // rows of the original matrix
  std::vector<double> norms(n);
  for (int j = 0; j < n; ++j) {
    norms[j] = std::sqrt(dot(&st.cols.a[static_cast<std::size_t>(j) * m],
                             &st.cols.a[static_cast<std::size_t>(j) * m], m));
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return norms[x] > norms[y]; });

  SvdFactors f;
  f.sigma.resize(n);
  f.u = Matrix(m, n);
  f.v = Matrix(st.vt.cols, n);
  for (int j = 0; j < n; ++j) {
    const int src = order[j];
    f.sigma[j] = norms[src];
    for (int i = 0; i < f.v.rows; ++i) f.v(i, j) = st.vt(src, i);
    if (norms[src] > 0.0) {
      const double inv = 1.0 / norms[src];
      const double* col = &st.cols.a[static_cast<std::size_t>(src) * m];
      for (int i = 0; i < m; ++i) f.u(i, j) = col[i] * inv;
    }
  }
  // Zero columns: complete U with unit vectors orthogonal to what is there.
  for (int j = 0; j < n; ++j) {
    if (f.sigma[j] > 0.0) continue;
    for (int cand = 0; cand < m; ++cand) {
      std::vector<double> r(m, 0.0);
      r[cand] = 1.0;
      for (int k = 0; k < n; ++k) {
        if (k == j) continue;
        if (k > j && f.sigma[k] == 0.0) continue;  // not filled yet
        double proj = 0.0;
        for (int i = 0; i < m; ++i) proj += f.u(i, k) * r[i];
        for (int i = 0; i < m; ++i) r[i] -= proj * f.u(i, k);
      }
      double nr = std::sqrt(dot(r.data(), r.data(), m));
      if (nr > 0.5) {
        for (int i = 0; i < m; ++i) f.u(i, j) = r[i] / nr;
        break;
      }
    }
  }
  return f;
}

JacobiState init_state(const Matrix& a, const Matrix* v0) {
  // expects a.rows >= a.cols
  JacobiState st;
  const int m = a.rows, n = a.cols;
  if (v0 == nullptr) {
    st.cols = Matrix(n, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) st.cols(j, i) = a(i, j);
    }
    st.vt = identity(n);
  } else {
    // start from the rotation v0: orthogonalize the columns of a*v0 and keep
    // accumulating into v0 so the final factors still refer to `a`
    if (v0->rows != n || v0->cols != n) {
      throw std::invalid_argument("svd_warm: starting factor must be n x n");
    }
    Matrix rotated = matmul(a, *v0);
    st.cols = Matrix(n, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) st.cols(j, i) = rotated(i, j);
    }
    st.vt = Matrix(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) st.vt(j, i) = (*v0)(i, j);
    }
  }
  return st;
}

SvdFactors svd_tall(const Matrix& a, const Matrix* v0) {
  JacobiState st = init_state(a, v0);
  jacobi_sweeps(st);
  return assemble(st);
}

void check_svd_input(const Matrix& m) {
  if (m.rows < 1 || m.cols < 1) {
    throw std::invalid_argument("svd: need at least 1x1 input, got " +
                                std::to_string(m.rows) + "x" +
                                std::to_string(m.cols));
  }
}

}  // namespace

SvdFactors svd(const Matrix& m) {
  check_svd_input(m);
  if (m.rows >= m.cols) return svd_tall(m, nullptr);
  SvdFactors t = svd_tall(transpose(m), nullptr);
  return SvdFactors{std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

SvdFactors svd_warm(const Matrix& m, const SvdFactors& prev) {
  check_svd_input(m);
  if (m.rows >= m.cols) return svd_tall(m, &prev.v);
  SvdFactors t = svd_tall(transpose(m), &prev.u);
  return SvdFactors{std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

double tail_sum_of(const std::vector<double>& sigma, int h) {
  if (h < 0) throw std::invalid_argument("tail_sum_of: h must be >= 0");
  double s = 0.0;
  for (int j = static_cast<int>(sigma.size()) - 1; j >= h; --j) s += sigma[j];
  return s;
}

double tail_singular_sum(const Matrix& w, int h) {
  if (h < 0) throw std::invalid_argument("tail_singular_sum: h must be >= 0");
  if (h >= std::min(w.rows, w.cols)) return 0.0;
  return tail_sum_of(svd(w).sigma, h);
}

int effective_rank(const std::vector<double>& sigma) {
  if (sigma.empty() || sigma[0] <= 0.0) return 0;
  const double tol = kRankTolFactor * sigma[0];
  int r = 0;
  for (double s : sigma) {
    if (s > tol) ++r;
  }
  return r;
}

namespace reference {

SvdFactors svd(const Matrix& mat) {
  check_svd_input(mat);
  if (mat.rows < mat.cols) {
    SvdFactors t = reference::svd(transpose(mat));
    return SvdFactors{std::move(t.v), std::move(t.sigma), std::move(t.u)};
  }
  const int m = mat.rows, n = mat.cols;
  // columns kept contiguous, same layout trick as the parallel path
  Matrix cols(n, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) cols(j, i) = mat(i, j);
  }
  Matrix vt = identity(n);

  double residual = 0.0;
  bool converged = (n < 2);
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    double sweep_max = 0.0;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double* wp = &cols.a[static_cast<std::size_t>(p) * m];
        double* wq = &cols.a[static_cast<std::size_t>(q) * m];
        const double app = dot(wp, wp, m);
        const double aqq = dot(wq, wq, m);
        if (app == 0.0 || aqq == 0.0) continue;
        const double apq = dot(wp, wq, m);
        const double rel = std::abs(apq) / std::sqrt(app * aqq);
        sweep_max = std::max(sweep_max, rel);
        if (rel <= kOffdiagTol) continue;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < m; ++i) {
          const double a = wp[i], b = wq[i];
          wp[i] = c * a - s * b;
          wq[i] = s * a + c * b;
        }
        double* vp = &vt.a[static_cast<std::size_t>(p) * n];
        double* vq = &vt.a[static_cast<std::size_t>(q) * n];
        for (int i = 0; i < n; ++i) {
          const double a = vp[i], b = vq[i];
          vp[i] = c * a - s * b;
          vq[i] = s * a + c * b;
        }
      }
    }
    residual = sweep_max;
    converged = (sweep_max < kOffdiagTol);
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "reference svd: no convergence after " << kMaxSweeps
        << " sweeps (residual " << residual << ")";
    throw std::runtime_error(msg.str());
  }

  std::vector<double> norms(n);
  for (int j = 0; j < n; ++j) {
    norms[j] = std::sqrt(
        dot(&cols.a[static_cast<std::size_t>(j) * m],
            &cols.a[static_cast<std::size_t>(j) * m], m));
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return norms[x] > norms[y]; });
  SvdFactors f;
  f.sigma.resize(n);
  f.u = Matrix(m, n);
  f.v = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    const int src = order[j];
    f.sigma[j] = norms[src];
    for (int i = 0; i < n; ++i) f.v(i, j) = vt(src, i);
    if (norms[src] > 0.0) {
      const double inv = 1.0 / norms[src];
      for (int i = 0; i < m; ++i) f.u(i, j) = cols(src, i) * inv;
    }
  }
  for (int j = 0; j < n; ++j) {
    if (f.sigma[j] > 0.0) continue;
    for (int cand = 0; cand < m; ++cand) {
      std::vector<double> r(m, 0.0);
      r[cand] = 1.0;
      for (int k = 0; k < n; ++k) {
        if (k == j || (k > j && f.sigma[k] == 0.0)) continue;
        double proj = 0.0;
        for (int i = 0; i < m; ++i) proj += f.u(i, k) * r[i];
        for (int i = 0; i < m; ++i) r[i] -= proj * f.u(i, k);
      }
      const double nr = std::sqrt(dot(r.data(), r.data(), m));
      if (nr > 0.5) {
        for (int i = 0; i < m; ++i) f.u(i, j) = r[i] / nr;
        break;
      }
    }
  }
  return f;
}

}  // namespace reference

}  // namespace localdrop::linalg
