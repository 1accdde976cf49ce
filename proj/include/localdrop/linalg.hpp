#pragma once

#include "localdrop/matrix.hpp"

namespace localdrop::linalg {

// Kernels are OpenMP-parallel over independent output elements. Each output
// element is accumulated in a fixed serial order, so results are identical
// for any thread count. Plain serial versions live in linalg::reference for
// cross-checking and for the benchmark.

Matrix matmul(const Matrix& x, const Matrix& y);
Matrix hadamard(const Matrix& x, const Matrix& y);
Matrix transpose(const Matrix& x);

// Valid-mode 2-D cross-correlation (no kernel flip). Output dims are
// input - kernel + 1 per axis; the kernel must fit inside the input.
Matrix conv2d_valid(const Matrix& x, const Matrix& kernel);

// One-sided Jacobi SVD: rotate column pairs until every off-diagonal Gram
// entry is below 1e-12 relative. Throws std::runtime_error with the residual
// if that has not happened after 100 sweeps.
SvdFactors svd(const Matrix& m);

// Same iteration seeded with the rotation from a previous factorization of a
// nearby matrix, which usually converges in one or two sweeps. The result
// satisfies the same contract as svd().
SvdFactors svd_warm(const Matrix& m, const SvdFactors& prev);

// Sum of sigma_j for j > h (1-indexed): the mass a rank-h truncation would
// discard. h >= min(rows, cols) gives 0.
double tail_singular_sum(const Matrix& w, int h);
double tail_sum_of(const std::vector<double>& sigma, int h);

// Count of sigma_j above the rank tolerance 1e-10 * sigma_1.
int effective_rank(const std::vector<double>& sigma);

namespace reference {
Matrix matmul(const Matrix& x, const Matrix& y);
Matrix hadamard(const Matrix& x, const Matrix& y);
Matrix conv2d_valid(const Matrix& x, const Matrix& kernel);
SvdFactors svd(const Matrix& m);  // cyclic pair order, single-threaded
}  // namespace reference

}  // namespace localdrop::linalg
