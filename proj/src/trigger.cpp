// SPDX-License-Identifier: Apache-2.0
#include "expseek/trigger.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "expseek/errors.hpp"
#include "expseek/stats.hpp"

namespace expseek {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Numerically stable log(1 + e^z).
double log1pexp(double z) {
  if (z > 35.0) return z;
  if (z < -35.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

}  // namespace

double logistic_objective(const std::vector<std::pair<double, int>>& samples,
                          double w, double b) {
  double nll = 0.0;
  for (const auto& [h, y] : samples) {
    const double z = w * h + b;
    nll += log1pexp(z) - static_cast<double>(y) * z;
  }
  return nll + 0.5 * w * w;
}

LogisticModel fit_logistic(const std::vector<std::pair<double, int>>& samples) {
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& [h, y] : samples) {
    (void)h;
    if (y == 1) has_pos = true;
    if (y == 0) has_neg = true;
  }
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::DegenerateData,
                "logistic fit requires both labels");
  }

  double w = 0.0;
  double b = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    double gw = w;  // L2 gradient on the slope
    double gb = 0.0;
    double hww = 1.0;  // L2 curvature
    double hwb = 0.0;
    double hbb = 0.0;
    for (const auto& [h, y] : samples) {
      const double p = sigmoid(w * h + b);
      const double r = p - static_cast<double>(y);
      const double s = std::max(p * (1.0 - p), 1e-12);
      gw += r * h;
      gb += r;
      hww += s * h * h;
      hwb += s * h;
      hbb += s;
    }
    const double gnorm = std::sqrt(gw * gw + gb * gb);
    if (gnorm < 1e-8) return {w, b};

    const double det = hww * hbb - hwb * hwb;
    if (std::abs(det) < 1e-300) {
      throw Error(ErrorCode::FitFailure, "singular Hessian in logistic fit");
    }
    double dw = (hbb * gw - hwb * gb) / det;
    double db = (hww * gb - hwb * gw) / det;

    // Backtracking keeps Newton honest on near-separable data.
    const double f0 = logistic_objective(samples, w, b);
    double step = 1.0;
    for (int back = 0; back < 40; ++back) {
      if (logistic_objective(samples, w - step * dw, b - step * db) < f0) {
        break;
      }
      step *= 0.5;
    }
    w -= step * dw;
    b -= step * db;
  }

  // Final gradient check after the iteration cap.
  double gw = w;
  double gb = 0.0;
  for (const auto& [h, y] : samples) {
    const double p = sigmoid(w * h + b);
    gw += (p - static_cast<double>(y)) * h;
    gb += (p - static_cast<double>(y));
  }
  if (std::sqrt(gw * gw + gb * gb) < 1e-6) return {w, b};
  throw Error(ErrorCode::FitFailure, "logistic fit did not converge");
}

double decision_boundary(const LogisticModel& model) {
  if (std::abs(model.w) < kMinSlope) {
    throw Error(ErrorCode::UnstableBoundary,
                "slope magnitude below stability floor");
  }
  if (model.w < 0.0) {
    throw Error(ErrorCode::UnstableBoundary,
                "sign-inverted fit: entropy anti-correlates with error");
  }
  return -model.b / model.w;
}

ThresholdInterval estimate_interval(const std::vector<double>& correct,
                                    const std::vector<double>& incorrect,
                                    std::size_t n_bootstrap, double confidence,
                                    Rng& rng, StepKind step_kind) {
  if (correct.empty() || incorrect.empty()) {
    throw Error(ErrorCode::EmptyInput,
                "both entropy collections must be non-empty");
  }
  if (n_bootstrap < 1) {
    throw Error(ErrorCode::ValidationError, "bootstrap count must be >= 1");
  }

  std::vector<double> boundaries;
  boundaries.reserve(n_bootstrap);
  std::vector<std::pair<double, int>> dataset;
  dataset.reserve(correct.size() + incorrect.size());

  for (std::size_t i = 0; i < n_bootstrap; ++i) {
    dataset.clear();
    for (std::size_t k = 0; k < correct.size(); ++k) {
      dataset.emplace_back(correct[rng.next_index(correct.size())], 0);
    }
    for (std::size_t k = 0; k < incorrect.size(); ++k) {
      dataset.emplace_back(incorrect[rng.next_index(incorrect.size())], 1);
    }
    try {
      boundaries.push_back(decision_boundary(fit_logistic(dataset)));
    } catch (const Error&) {
      // Rejected iterate: single-class resample, unstable or negative slope,
      // or non-convergence. Skipped, not clamped.
    }
  }

  if (boundaries.size() < 30) {
    throw Error(ErrorCode::InsufficientBootstrap,
                "fewer than 30 accepted bootstrap iterates");
  }

  std::sort(boundaries.begin(), boundaries.end());
  const double alpha = (1.0 - confidence) / 2.0;
  ThresholdInterval out;
  out.lower = empirical_quantile(boundaries, alpha);
  out.upper = empirical_quantile(boundaries, 1.0 - alpha);
  out.step_kind = step_kind;
  out.n_bootstrap = boundaries.size();
  return out;
}

double intervention_probability(double entropy,
                                const ThresholdInterval& interval) {
  if (interval.upper <= interval.lower) {
    return entropy >= interval.lower ? 1.0 : 0.0;
  }
  if (entropy < interval.lower) return 0.0;
  if (entropy > interval.upper) return 1.0;
  return (entropy - interval.lower) / (interval.upper - interval.lower);
}

TriggerDecision sample_trigger(double probability, double entropy,
                               bool prev_step_intervened, Rng& rng) {
  if (probability < 0.0 || probability > 1.0) {
    throw Error(ErrorCode::ValidationError, "probability outside [0,1]");
  }
  TriggerDecision d;
  d.probability = probability;
  d.entropy = entropy;
  if (prev_step_intervened) {
    d.suppressed_by_silence = true;
    d.intervene = false;
    return d;
  }
  d.intervene = rng.next_double() < probability;
  return d;
}

std::string to_json(const ThresholdArtifact& artifact) {
  auto interval_json = [](const ThresholdInterval& iv) {
    return nlohmann::json{{"step_kind", to_string(iv.step_kind)},
                          {"lower", iv.lower},
                          {"upper", iv.upper},
                          {"n_bootstrap", iv.n_bootstrap}};
  };
  nlohmann::json j{{"model_name", artifact.model_name},
                   {"process", interval_json(artifact.process)},
                   {"answer", interval_json(artifact.answer)},
                   {"seed", artifact.seed},
                   {"created_at", artifact.created_at}};
  return j.dump(2);
}

ThresholdArtifact threshold_artifact_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  auto interval = [](const nlohmann::json& ij) {
    ThresholdInterval iv;
    iv.step_kind = step_kind_from_string(ij.at("step_kind").get<std::string>());
    iv.lower = ij.at("lower").get<double>();
    iv.upper = ij.at("upper").get<double>();
    iv.n_bootstrap = ij.value("n_bootstrap", std::size_t{1});
    if (iv.lower > iv.upper) {
      throw Error(ErrorCode::ValidationError,
                  "threshold interval has lower > upper");
    }
    return iv;
  };
  ThresholdArtifact out;
  out.model_name = j.value("model_name", "");
  out.process = interval(j.at("process"));
  out.answer = interval(j.at("answer"));
  out.seed = j.value("seed", std::uint64_t{0});
  out.created_at = j.value("created_at", "");
  return out;
}

}  // namespace expseek
