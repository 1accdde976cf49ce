#include "localdrop/drop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace localdrop::drop {

KeepRateVector::KeepRateVector(std::vector<double> t) : theta(std::move(t)) {
  for (double v : theta) {
    if (!(v >= kThetaMin && v <= 1.0)) {
      throw std::invalid_argument("KeepRateVector: entry " + std::to_string(v) +
                                  " outside [" + std::to_string(kThetaMin) + ", 1]");
    }
  }
}

DropBlockParams::DropBlockParams(double d_, int b_, int rows_, int cols_)
    : d(d_), b(b_), rows(rows_), cols(cols_) {
  if (!(d >= 0.0 && d < 1.0)) {
    throw std::invalid_argument("DropBlockParams: d must be in [0,1), got " +
                                std::to_string(d));
  }
  if (b < 1 || b % 2 == 0) {
    throw std::invalid_argument("DropBlockParams: block size must be odd and >= 1, got " +
                                std::to_string(b));
  }
  if (rows < 1 || cols < 1 || b > rows || b > cols) {
    throw std::invalid_argument("DropBlockParams: block " + std::to_string(b) +
                                " does not fit map " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

DropBlockParams DropBlockParams::square(double d, int b, int t) {
  return DropBlockParams(d, b, t, t);
}

double dropblock_gamma(const DropBlockParams& p) {
  const double area = static_cast<double>(p.rows) * p.cols;
  const double seeds = static_cast<double>(p.rows - p.b + 1) * (p.cols - p.b + 1);
  return p.effective_d() / (static_cast<double>(p.b) * p.b) * area / seeds;
}

double dropblock_gamma(double d, int b, int t) {
  return dropblock_gamma(DropBlockParams::square(d, b, t));
}

double dropblock_gamma_slope(const DropBlockParams& p) {
  const double area = static_cast<double>(p.rows) * p.cols;
  const double seeds = static_cast<double>(p.rows - p.b + 1) * (p.cols - p.b + 1);
  return p.schedule_scale / (static_cast<double>(p.b) * p.b) * area / seeds;
}

DropMask sample_dropout_mask(const KeepRateVector& theta, std::mt19937_64& rng) {
  DropMask mask;
  mask.channels = 1;
  mask.rows = 1;
  mask.cols = theta.size();
  mask.m.resize(theta.theta.size());
  for (std::size_t i = 0; i < theta.theta.size(); ++i) {
    mask.m[i] = (uniform01(rng) < theta.theta[i]) ? 1.0 : 0.0;
  }
  return mask;
}

DropMask sample_dropblock_mask(const DropBlockParams& p, int channels,
                               std::mt19937_64& rng) {
  if (channels < 1) {
    throw std::invalid_argument("sample_dropblock_mask: channels must be >= 1");
  }
  const double gamma = dropblock_gamma(p);
  DropMask mask;
  mask.channels = channels;
  mask.rows = p.rows;
  mask.cols = p.cols;
  mask.m.assign(static_cast<std::size_t>(channels) * p.rows * p.cols, 1.0);
  for (int ch = 0; ch < channels; ++ch) {
    double* plane = &mask.m[static_cast<std::size_t>(ch) * p.rows * p.cols];
    for (int i = 0; i + p.b <= p.rows; ++i) {
      for (int j = 0; j + p.b <= p.cols; ++j) {
        if (uniform01(rng) < gamma) {
          for (int bi = 0; bi < p.b; ++bi) {
            for (int bj = 0; bj < p.b; ++bj) {
              plane[(i + bi) * p.cols + (j + bj)] = 0.0;
            }
          }
        }
      }
    }
  }
  return mask;
}

linalg::Matrix cover_counts(int rows, int cols, int b) {
  linalg::Matrix cover(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const int ci = std::min(rows - b, i) - std::max(0, i - b + 1) + 1;
    for (int j = 0; j < cols; ++j) {
      const int cj = std::min(cols - b, j) - std::max(0, j - b + 1) + 1;
      cover(i, j) = static_cast<double>(ci) * cj;
    }
  }
  return cover;
}

KeepProbMatrix keep_prob_matrix(const DropBlockParams& p) {
  const double gamma = dropblock_gamma(p);
  linalg::Matrix cover = cover_counts(p.rows, p.cols, p.b);
  KeepProbMatrix out;
  out.theta_hat = linalg::Matrix(p.rows, p.cols);
  for (std::size_t i = 0; i < cover.a.size(); ++i) {
    const double v = 1.0 - cover.a[i] * gamma;
    if (v < 0.0) {
      out.theta_hat.a[i] = 0.0;
      out.clamped = true;
    } else {
      out.theta_hat.a[i] = v;
    }
  }
  return out;
}

KeepRateState KeepRateState::make_vec(KeepRateVector v) {
  KeepRateState s;
  s.kind = Kind::vec;
  s.vec = std::move(v);
  return s;
}

KeepRateState KeepRateState::make_block(DropBlockParams p) {
  KeepRateState s;
  s.kind = Kind::block;
  s.block = p;
  return s;
}

double keep_norm(const KeepRateVector& v) {
  double s = 0.0;
  for (double t : v.theta) s += t * t;
  return std::sqrt(s);
}

double keep_norm(const KeepProbMatrix& m) { return linalg::frobenius_norm(m.theta_hat); }

double keep_norm(const KeepRateState& s) {
  switch (s.kind) {
    case KeepRateState::Kind::vec:
      return keep_norm(s.vec);
    case KeepRateState::Kind::block:
      return keep_norm(keep_prob_matrix(s.block));
    case KeepRateState::Kind::none:
      break;
  }
  return 1.0;
}

std::vector<double> channel_keep_norms(const KeepRateState& s, int channels) {
  return std::vector<double>(static_cast<std::size_t>(channels), keep_norm(s));
}

}  // namespace localdrop::drop
