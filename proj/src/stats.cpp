// SPDX-License-Identifier: Apache-2.0
#include "expseek/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "expseek/errors.hpp"

namespace expseek {

double empirical_quantile(const std::vector<double>& values, double p) {
  if (values.empty()) {
    throw Error(ErrorCode::EmptyInput, "quantile of empty sample");
  }
  if (p < 0.0 || p > 1.0) {
    throw Error(ErrorCode::ValidationError, "quantile fraction outside [0,1]");
  }
  const std::size_t n = values.size();
  const double pos = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_q(double lambda) {
  if (lambda < 1e-10) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::EmptyInput, "KS test requires non-empty samples");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n -
                             static_cast<double>(j) / m));
  }
  KsResult out;
  out.statistic = d;
  const double ne = n * m / (n + m);
  out.p_value = kolmogorov_q(std::sqrt(ne) * d);
  return out;
}

double auc(const std::vector<double>& incorrect_scores,
           const std::vector<double>& correct_scores) {
  if (incorrect_scores.empty() || correct_scores.empty()) {
    throw Error(ErrorCode::EmptyInput, "AUC requires non-empty score lists");
  }
  // Rank-based O((n+m) log(n+m)); equivalent to pair enumeration with
  // half-credit ties.
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(incorrect_scores.size() + correct_scores.size());
  for (double s : incorrect_scores) pooled.emplace_back(s, 1);
  for (double s : correct_scores) pooled.emplace_back(s, 0);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  double rank_sum = 0.0;  // sum of mid-ranks of incorrect scores
  std::size_t idx = 0;
  while (idx < pooled.size()) {
    std::size_t end = idx;
    while (end < pooled.size() && pooled[end].first == pooled[idx].first) ++end;
    const double mid_rank =
        (static_cast<double>(idx + 1) + static_cast<double>(end)) / 2.0;
    for (std::size_t k = idx; k < end; ++k) {
      if (pooled[k].second == 1) rank_sum += mid_rank;
    }
    idx = end;
  }
  const double n1 = static_cast<double>(incorrect_scores.size());
  const double n0 = static_cast<double>(correct_scores.size());
  const double u = rank_sum - n1 * (n1 + 1.0) / 2.0;
  return u / (n1 * n0);
}

}  // namespace expseek
