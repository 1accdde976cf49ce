#pragma once

#include <random>
#include <vector>

#include "localdrop/matrix.hpp"

namespace localdrop::drop {

// Floor on optimized keep rates: a keep probability of 0 kills its layer, so
// the keep-rate update never goes below this.
constexpr double kThetaMin = 0.05;

inline double uniform01(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;  // [0, 1)
}

// Per-unit keep probabilities for a dense layer input.
struct KeepRateVector {
  std::vector<double> theta;

  KeepRateVector() = default;
  explicit KeepRateVector(std::vector<double> t);  // validates [kThetaMin, 1]
  int size() const { return static_cast<int>(theta.size()); }
};

// Seed-and-expand block dropping on a feature map. `d` is the target drop
// rate; the seed probability gamma is derived from it (recomputed on demand,
// so it can never go stale). Maps may be non-square: the square t in the
// formula generalizes to rows x cols. `schedule_scale` is the linear warmup
// multiplier applied on top of d (1 = no warmup).
struct DropBlockParams {
  double d = 0.0;
  int b = 3;
  int rows = 0;
  int cols = 0;
  double schedule_scale = 1.0;

  DropBlockParams() = default;
  DropBlockParams(double d_, int b_, int rows_, int cols_);  // validates
  static DropBlockParams square(double d, int b, int t);
  int t() const { return rows; }
  double effective_d() const { return d * schedule_scale; }
};

// gamma = d_eff/b^2 * (rows*cols) / ((rows-b+1)*(cols-b+1))
double dropblock_gamma(const DropBlockParams& p);
double dropblock_gamma(double d, int b, int t);
// d(gamma)/d(d): gamma is linear in d, so this is gamma/d_eff times the
// schedule scale; valid at d = 0.
double dropblock_gamma_slope(const DropBlockParams& p);

// Binary mask, one entry per unit; conv feature maps get one plane per
// channel. Dense masks use channels = rows = 1.
struct DropMask {
  int channels = 1;
  int rows = 1;
  int cols = 0;
  std::vector<double> m;  // entries in {0, 1}

  double at(int ch, int i, int j) const {
    return m[(static_cast<std::size_t>(ch) * rows + i) * cols + j];
  }
};

DropMask sample_dropout_mask(const KeepRateVector& theta, std::mt19937_64& rng);
DropMask sample_dropblock_mask(const DropBlockParams& p, int channels,
                               std::mt19937_64& rng);

// cover_count(i,j): how many valid seed positions reach (i,j) with their
// b x b block.
linalg::Matrix cover_counts(int rows, int cols, int b);

// Analytic keep probabilities theta_hat = 1 - cover_count * gamma. The
// additive form overcounts overlapping seeds, so entries are clamped at 0;
// `clamped` reports whether that happened (it means gamma left the small
// regime the construction presumes).
struct KeepProbMatrix {
  linalg::Matrix theta_hat;
  bool clamped = false;
};

KeepProbMatrix keep_prob_matrix(const DropBlockParams& p);

// A layer input either has no drop state, a dense keep-rate vector, or
// DropBlock parameters.
struct KeepRateState {
  enum class Kind { none, vec, block };
  Kind kind = Kind::none;
  KeepRateVector vec;
  DropBlockParams block;

  static KeepRateState make_none() { return {}; }
  static KeepRateState make_vec(KeepRateVector v);
  static KeepRateState make_block(DropBlockParams p);
};

double keep_norm(const KeepRateVector& v);
double keep_norm(const KeepProbMatrix& m);
// none -> 1.0 (a drop-free layer contributes a unit factor to the bound)
double keep_norm(const KeepRateState& s);
// Channels share one mask distribution, so per-channel norms coincide.
std::vector<double> channel_keep_norms(const KeepRateState& s, int channels);

}  // namespace localdrop::drop
