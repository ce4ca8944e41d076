// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "expseek/entropy.hpp"
#include "expseek/rng.hpp"

namespace expseek {

/// One-feature logistic model sigma(w*H + b) for the probability that a step
/// is incorrect. Labels: 1 = incorrect, 0 = correct.
struct LogisticModel {
  double w = 0.0;  // slope on entropy, 1/nats
  double b = 0.0;  // intercept
};

/// Minimum slope magnitude for a usable decision boundary.
inline constexpr double kMinSlope = 1e-6;

/// Maximizer of the penalized log-likelihood (L2 of unit strength on the
/// slope only, intercept unpenalized) via Newton iterations. Converges when
/// the gradient norm drops below 1e-8, capped at 100 iterations.
LogisticModel fit_logistic(const std::vector<std::pair<double, int>>& samples);

/// Entropy at P = 0.5, i.e. -b/w. Throws unstable-boundary when |w| < 1e-6
/// and rejects negative slopes (entropy anti-correlated with error).
double decision_boundary(const LogisticModel& model);

/// Penalized negative log-likelihood shared by the fitter and its oracle.
double logistic_objective(const std::vector<std::pair<double, int>>& samples,
                          double w, double b);

struct ThresholdInterval {
  double lower = 0.0;
  double upper = 0.0;
  StepKind step_kind = StepKind::Process;
  std::size_t n_bootstrap = 0;
};

/// Bootstrap threshold estimation: resample each collection with replacement
/// preserving sizes, fit, extract the boundary, and take the confidence
/// interval of the accepted boundaries. Iterates with single-class resamples
/// or non-positive/near-zero slopes are rejected.
ThresholdInterval estimate_interval(const std::vector<double>& correct,
                                    const std::vector<double>& incorrect,
                                    std::size_t n_bootstrap, double confidence,
                                    Rng& rng,
                                    StepKind step_kind = StepKind::Process);

/// Piecewise-linear intervention probability: 0 below the interval, linear
/// ramp inside, 1 above. A zero-width interval degenerates to a step
/// function firing at H >= lower.
double intervention_probability(double entropy,
                                const ThresholdInterval& interval);

struct TriggerDecision {
  double probability = 0.0;
  bool intervene = false;
  double entropy = 0.0;
  bool suppressed_by_silence = false;
};

/// Sample the intervene/skip decision. An intervention at the previous step
/// forces a skip regardless of probability (silence rule).
TriggerDecision sample_trigger(double probability, double entropy,
                               bool prev_step_intervened, Rng& rng);

/// Persisted threshold artifact.
struct ThresholdArtifact {
  std::string model_name;
  ThresholdInterval process;
  ThresholdInterval answer;
  std::uint64_t seed = 0;
  std::string created_at;
};

std::string to_json(const ThresholdArtifact& artifact);
ThresholdArtifact threshold_artifact_from_json(const std::string& text);

}  // namespace expseek
