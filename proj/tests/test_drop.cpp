#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "localdrop/drop.hpp"

using localdrop::drop::DropBlockParams;
using localdrop::drop::DropMask;
using localdrop::drop::KeepRateState;
using localdrop::drop::KeepRateVector;

namespace {

// Pearson chi-square over per-unit 2x2 tables (kept/dropped x sampler A/B),
// summed across units. Under equal keep probabilities the statistic is
// chi-square with one degree of freedom per unit.
double two_sample_chi2(const std::vector<long>& kept_a, const std::vector<long>& kept_b,
                       long draws) {
  double stat = 0.0;
  for (std::size_t u = 0; u < kept_a.size(); ++u) {
    const double row_a = draws, row_b = draws;
    const double col_kept = static_cast<double>(kept_a[u]) + kept_b[u];
    const double col_drop = 2.0 * draws - col_kept;
    const double total = 2.0 * draws;
    const double cells[2][2] = {
        {static_cast<double>(kept_a[u]), static_cast<double>(draws - kept_a[u])},
        {static_cast<double>(kept_b[u]), static_cast<double>(draws - kept_b[u])}};
    const double rows[2] = {row_a, row_b};
    const double cols[2] = {col_kept, col_drop};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double expect = rows[i] * cols[j] / total;
        if (expect > 0.0) {
          const double diff = cells[i][j] - expect;
          stat += diff * diff / expect;
        }
      }
    }
  }
  return stat;
}

}  // namespace

TEST_SUITE("drop") {

TEST_CASE("keep rate vector enforces the floor and ceiling") {
  CHECK_THROWS_AS(KeepRateVector({0.01}), std::invalid_argument);
  CHECK_THROWS_AS(KeepRateVector({1.2}), std::invalid_argument);
  KeepRateVector ok({0.05, 1.0, 0.5});
  CHECK(ok.size() == 3);
}

TEST_CASE("dropblock params validation") {
  CHECK_THROWS_AS(DropBlockParams(0.1, 2, 8, 8), std::invalid_argument);   // even b
  CHECK_THROWS_AS(DropBlockParams(0.1, 9, 8, 8), std::invalid_argument);   // b > t
  CHECK_THROWS_AS(DropBlockParams(1.0, 3, 8, 8), std::invalid_argument);   // d out of range
  CHECK_THROWS_AS(DropBlockParams(-0.1, 3, 8, 8), std::invalid_argument);
  DropBlockParams ok(0.1, 3, 8, 10);
  CHECK(ok.effective_d() == 0.1);
}

TEST_CASE("gamma limits and the arithmetic fixture") {
  CHECK(localdrop::drop::dropblock_gamma(0.3, 1, 9) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(localdrop::drop::dropblock_gamma(0.3, 9, 9) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(localdrop::drop::dropblock_gamma(0.09, 3, 10) == doctest::Approx(0.015625).epsilon(1e-15));
}

TEST_CASE("gamma slope matches gamma/d and survives d=0") {
  DropBlockParams p(0.08, 3, 12, 10);
  const double g = localdrop::drop::dropblock_gamma(p);
  CHECK(localdrop::drop::dropblock_gamma_slope(p) == doctest::Approx(g / 0.08).epsilon(1e-12));
  DropBlockParams zero(0.0, 3, 12, 10);
  CHECK(localdrop::drop::dropblock_gamma_slope(zero) ==
        doctest::Approx(g / 0.08).epsilon(1e-12));
  DropBlockParams scaled = p;
  scaled.schedule_scale = 0.5;
  CHECK(localdrop::drop::dropblock_gamma(scaled) == doctest::Approx(0.5 * g).epsilon(1e-12));
  CHECK(localdrop::drop::dropblock_gamma_slope(scaled) ==
        doctest::Approx(0.5 * g / 0.08).epsilon(1e-12));
}

TEST_CASE("dropout mask degenerate and independent coordinates") {
  std::mt19937_64 rng(41);
  KeepRateVector all_one({1.0, 1.0, 1.0});
  for (int i = 0; i < 200; ++i) {
    DropMask m = localdrop::drop::sample_dropout_mask(all_one, rng);
    for (double v : m.m) CHECK(v == 1.0);
  }
  KeepRateVector mix({1.0, 0.5});
  int second_kept = 0;
  for (int i = 0; i < 2000; ++i) {
    DropMask m = localdrop::drop::sample_dropout_mask(mix, rng);
    CHECK(m.m[0] == 1.0);
    second_kept += (m.m[1] == 1.0);
  }
  CHECK(second_kept > 800);
  CHECK(second_kept < 1200);
}

TEST_CASE("dropout mask at the floor matches its binomial expectation") {
  std::mt19937_64 rng(43);
  KeepRateVector floor({0.05, 0.05, 0.05, 0.05});
  std::vector<long> kept(4, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    DropMask m = localdrop::drop::sample_dropout_mask(floor, rng);
    for (int u = 0; u < 4; ++u) kept[u] += (m.m[u] == 1.0);
  }
  for (int u = 0; u < 4; ++u) {
    const double mean = static_cast<double>(kept[u]) / draws;
    CHECK(mean > 0.047);
    CHECK(mean < 0.053);
  }
}

TEST_CASE("dropblock mask with gamma 0 is all ones") {
  std::mt19937_64 rng(47);
  DropMask m =
      localdrop::drop::sample_dropblock_mask(DropBlockParams(0.0, 3, 9, 9), 2, rng);
  for (double v : m.m) CHECK(v == 1.0);
}

TEST_CASE("dropblock with b = t zeroes the whole map once its one seed fires") {
  std::mt19937_64 rng(53);
  DropBlockParams p(0.9, 5, 5, 5);
  bool saw_full_drop = false;
  for (int i = 0; i < 100 && !saw_full_drop; ++i) {
    DropMask m = localdrop::drop::sample_dropblock_mask(p, 1, rng);
    if (m.m[0] == 0.0) {
      saw_full_drop = true;
      for (double v : m.m) CHECK(v == 0.0);
    } else {
      for (double v : m.m) CHECK(v == 1.0);  // single seed: all or nothing
    }
  }
  CHECK(saw_full_drop);
}

TEST_CASE("dropblock with b = 1 is distributionally plain dropout") {
  // two-sample chi-square on a 4x4 map, 100k draws each, df = 16;
  // the 0.99 quantile of chi-square(16) is 32.00
  const double critical = 31.9999;
  const int t = 4, units = t * t, draws = 100000;
  const double d = 0.15;  // gamma = d when b = 1
  std::mt19937_64 rng(59);
  DropBlockParams p(d, 1, t, t);
  KeepRateVector theta(std::vector<double>(units, 1.0 - d));

  std::vector<long> kept_block(units, 0), kept_vec(units, 0), kept_wrong(units, 0);
  for (int i = 0; i < draws; ++i) {
    DropMask mb = localdrop::drop::sample_dropblock_mask(p, 1, rng);
    for (int u = 0; u < units; ++u) kept_block[u] += (mb.m[u] == 1.0);
  }
  for (int i = 0; i < draws; ++i) {
    DropMask mv = localdrop::drop::sample_dropout_mask(theta, rng);
    for (int u = 0; u < units; ++u) kept_vec[u] += (mv.m[u] == 1.0);
  }
  CHECK(two_sample_chi2(kept_block, kept_vec, draws) < critical);

  // power check: a visibly different keep rate must blow the statistic up
  KeepRateVector wrong(std::vector<double>(units, 1.0 - 2.0 * d));
  for (int i = 0; i < draws; ++i) {
    DropMask mw = localdrop::drop::sample_dropout_mask(wrong, rng);
    for (int u = 0; u < units; ++u) kept_wrong[u] += (mw.m[u] == 1.0);
  }
  CHECK(two_sample_chi2(kept_block, kept_wrong, draws) > critical);
}

TEST_CASE("keep prob matrix reproduces the analytic entries") {
  const double d = 0.05;
  DropBlockParams p(d, 3, 10, 10);
  const double gamma = localdrop::drop::dropblock_gamma(p);
  auto kp = localdrop::drop::keep_prob_matrix(p);
  CHECK_FALSE(kp.clamped);
  CHECK(kp.theta_hat(0, 0) == doctest::Approx(1.0 - gamma).epsilon(1e-15));
  CHECK(kp.theta_hat(0, 1) == doctest::Approx(1.0 - 2.0 * gamma).epsilon(1e-15));
  CHECK(kp.theta_hat(5, 5) == doctest::Approx(1.0 - 9.0 * gamma).epsilon(1e-15));

  DropBlockParams unit(d, 1, 6, 6);
  auto kp1 = localdrop::drop::keep_prob_matrix(unit);
  for (double v : kp1.theta_hat.a) CHECK(v == doctest::Approx(1.0 - d).epsilon(1e-15));
}

TEST_CASE("keep prob matrix flip symmetry, range, and clamping") {
  for (auto [d, b, t] : {std::tuple{0.05, 3, 8}, std::tuple{0.1, 5, 12}}) {
    auto kp = localdrop::drop::keep_prob_matrix(DropBlockParams(d, b, t, t));
    const auto& m = kp.theta_hat;
    for (int i = 0; i < m.rows; ++i) {
      for (int j = 0; j < m.cols; ++j) {
        CHECK(m(i, j) >= 0.0);
        CHECK(m(i, j) <= 1.0);
        CHECK(m(i, j) == m(m.rows - 1 - i, j));
        CHECK(m(i, j) == m(i, m.cols - 1 - j));
      }
    }
  }
  // gamma large enough that the additive estimate dips below zero
  auto clamped = localdrop::drop::keep_prob_matrix(DropBlockParams(0.9, 5, 7, 7));
  CHECK(clamped.clamped);
  for (double v : clamped.theta_hat.a) CHECK(v >= 0.0);
}

TEST_CASE("cover counts hit the documented corner and interior values") {
  for (int b : {1, 3, 5, 7}) {
    for (int t : {8, 12, 16}) {
      if (b > t) continue;
      auto cover = localdrop::drop::cover_counts(t, t, b);
      double mn = 1e300, mx = 0.0;
      for (double v : cover.a) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
      CHECK(mn == 1.0);  // the map corner is reached by exactly one seed
      CHECK(mx <= static_cast<double>(b) * b);
      if (t >= 2 * b - 1) {
        CHECK(cover(t / 2, t / 2) == static_cast<double>(b) * b);
      }
      // corner of the valid seed region; the closed form needs room for the
      // full (b+1)/2 overlap run, which t=8, b=7 does not have
      if (t >= (3 * b - 1) / 2) {
        const int edge = (b - 1) / 2;
        const double expect = ((b + 1) / 2) * ((b + 1) / 2);
        CHECK(cover(edge, edge) == expect);
      }
    }
  }
}

TEST_CASE("monte carlo keep frequency matches the exact per-unit probability") {
  // 200k masks; empirical keep rate per unit vs (1-gamma)^cover within 3 SE,
  // and the additive Appendix estimate is within cover^2*gamma^2/2 of exact
  const double d = 0.09;
  const int b = 3, t = 10;
  DropBlockParams p(d, b, t, t);
  const double gamma = localdrop::drop::dropblock_gamma(p);
  auto cover = localdrop::drop::cover_counts(t, t, b);

  const int draws = 200000;
  std::mt19937_64 rng(61);
  std::vector<long> kept(t * t, 0);
  for (int i = 0; i < draws; ++i) {
    DropMask m = localdrop::drop::sample_dropblock_mask(p, 1, rng);
    for (int u = 0; u < t * t; ++u) kept[u] += (m.m[u] == 1.0);
  }
  for (int u = 0; u < t * t; ++u) {
    const double c = cover.a[u];
    const double exact = std::pow(1.0 - gamma, c);
    const double se = std::sqrt(exact * (1.0 - exact) / draws);
    const double emp = static_cast<double>(kept[u]) / draws;
    CHECK(std::abs(emp - exact) <= 3.0 * se);
    CHECK(std::abs(c * gamma - (1.0 - exact)) < c * c * gamma * gamma / 2.0);
  }
}

TEST_CASE("dropped fraction tracks d in the small-gamma regime") {
  DropBlockParams p(0.09, 3, 10, 10);
  std::mt19937_64 rng(67);
  const int draws = 20000;
  double dropped = 0.0;
  for (int i = 0; i < draws; ++i) {
    DropMask m = localdrop::drop::sample_dropblock_mask(p, 1, rng);
    for (double v : m.m) dropped += (v == 0.0);
  }
  const double fraction = dropped / (static_cast<double>(draws) * 100.0);
  CHECK(std::abs(fraction - 0.09) / 0.09 < 0.15);
}

TEST_CASE("keep_norm on vectors, matrices, and states") {
  KeepRateVector v({1.0, 1.0, 1.0, 1.0});
  CHECK(localdrop::drop::keep_norm(v) == doctest::Approx(2.0).epsilon(1e-15));

  localdrop::drop::KeepProbMatrix half;
  half.theta_hat = localdrop::linalg::Matrix(4, 4, std::vector<double>(16, 0.5));
  CHECK(localdrop::drop::keep_norm(half) == doctest::Approx(2.0).epsilon(1e-15));

  DropBlockParams p(0.05, 3, 8, 8);
  auto kp = localdrop::drop::keep_prob_matrix(p);
  double flat = 0.0;
  for (double x : kp.theta_hat.a) flat += x * x;
  flat = std::sqrt(flat);
  KeepRateState st = KeepRateState::make_block(p);
  CHECK(localdrop::drop::keep_norm(st) == doctest::Approx(flat).epsilon(1e-12));

  CHECK(localdrop::drop::keep_norm(KeepRateState::make_none()) == 1.0);

  auto per_channel = localdrop::drop::channel_keep_norms(st, 3);
  REQUIRE(per_channel.size() == 3);
  for (double n : per_channel) CHECK(n == doctest::Approx(flat).epsilon(1e-12));
}

}  // TEST_SUITE
