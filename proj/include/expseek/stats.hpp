// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

namespace expseek {

/// Linear-interpolation quantile at position p*(n-1). `values` must be sorted
/// ascending and non-empty; p in [0, 1].
double empirical_quantile(const std::vector<double>& values, double p);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov statistic, sup |ECDF_a - ECDF_b|, with an
/// asymptotic p-value using effective sample size n*m/(n+m). The p-value is
/// reporting-only; thresholds are driven by the statistic.
KsResult ks_statistic(std::vector<double> a, std::vector<double> b);

/// Probability that a random incorrect score exceeds a random correct score,
/// ties counted one half (normalized Mann-Whitney U).
double auc(const std::vector<double>& incorrect_scores,
           const std::vector<double>& correct_scores);

}  // namespace expseek
