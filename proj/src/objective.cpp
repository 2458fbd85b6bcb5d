// Copyright 2026 The HFTT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hftt/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hftt/error.hpp"

namespace hftt {
namespace {

double log_sum_exp(std::span<const double> logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double acc = 0.0;
  for (double s : logits) acc += std::exp(s - peak);
  return peak + std::log(acc);
}

const double kLogClamp = std::log(kProbabilityClamp);

// log p clamped to [log ε, log(1 - ε)]. Returns true when the clamp fired.
// Only the loss value is clamped; gradients use the exact log-domain masses.
bool clamp_log_probability(double& log_p) {
  const double upper = std::log1p(-kProbabilityClamp);
  if (log_p < kLogClamp) {
    log_p = kLogClamp;
    return true;
  }
  if (log_p > upper) {
    log_p = upper;
    return true;
  }
  return false;
}

void check_batches(const DetectorModel& model, const Matrix& batch_in,
                   const Matrix& batch_all) {
  if (batch_in.empty() || batch_all.empty()) {
    fail(ErrorKind::kValidation, "loss batches must be non-empty");
  }
  if (batch_in.cols() != model.dim() || batch_all.cols() != model.dim()) {
    fail(ErrorKind::kValidation, "batch dimension does not match model dimension " +
                                     std::to_string(model.dim()));
  }
}

// Shared pass for loss, gradient, or both. `weights` are the focal weights
// over batch_all; empty means "compute them from the current model".
LossAndGradient evaluate(const DetectorModel& model, const Matrix& batch_in,
                         const Matrix& batch_all, const LossConfig& cfg,
                         std::span<const double> weights, bool want_gradient) {
  cfg.validate();
  check_batches(model, batch_in, batch_all);

  const double inv_tau = 1.0 / model.temperature;
  const std::size_t n_out = model.trainable.rows();
  const std::size_t dim = model.dim();
  const bool proposed = cfg.variant == LossVariant::kProposed;

  LossAndGradient result;
  LossBreakdown& br = result.loss;
  if (want_gradient) result.gradient = Matrix(n_out, dim);

  auto accumulate = [&](std::span<const double> x, double coeff,
                        std::span<const double> softmax_minus_target) {
    for (std::size_t j = 0; j < n_out; ++j) {
      const double c = coeff * inv_tau * softmax_minus_target[j];
      if (c == 0.0) continue;
      auto g = result.gradient.row(j);
      for (std::size_t k = 0; k < dim; ++k) g[k] += c * x[k];
    }
  };

  std::vector<double> factor(n_out);

  // In-distribution term: -log(1 - p), gradient (x / tau) q_j.
  const double in_coeff = proposed ? 1.0 : cfg.lambda;
  br.in_p.reserve(batch_in.rows());
  for (std::size_t r = 0; r < batch_in.rows(); ++r) {
    const auto x = batch_in.row(r);
    const LogMasses m = log_masses(model, x);
    br.in_p.push_back(std::exp(m.log_out - m.log_all));
    double log_one_minus_p = m.log_in - m.log_all;
    const bool clamped = clamp_log_probability(log_one_minus_p);
    br.clamp_events += clamped;
    br.in_term -= in_coeff * log_one_minus_p;
    if (want_gradient) {
      for (std::size_t j = 0; j < n_out; ++j) {
        factor[j] = std::exp(m.out_logits[j] - m.log_all);
      }
      accumulate(x, in_coeff, factor);
    }
  }

  // All-data term: -log p, gradient (x / tau)(q_j - r_j).
  std::vector<LogMasses> masses;
  masses.reserve(batch_all.rows());
  br.per_sample_p.reserve(batch_all.rows());
  for (std::size_t r = 0; r < batch_all.rows(); ++r) {
    masses.push_back(log_masses(model, batch_all.row(r)));
    br.per_sample_p.push_back(std::exp(masses.back().log_out - masses.back().log_all));
  }

  if (!weights.empty()) {
    if (weights.size() != batch_all.rows()) {
      fail(ErrorKind::kValidation, "focal weight count does not match batch size");
    }
    br.focal_weights.assign(weights.begin(), weights.end());
  } else if (proposed) {
    br.focal_weights = focal_weights(br.per_sample_p, cfg.gamma);
  } else {
    br.focal_weights.assign(batch_all.rows(), 1.0);
  }

  const double out_scale = 1.0 - cfg.lambda;
  for (std::size_t r = 0; r < batch_all.rows(); ++r) {
    const LogMasses& m = masses[r];
    double log_p = m.log_out - m.log_all;
    const bool clamped = clamp_log_probability(log_p);
    br.clamp_events += clamped;
    const double coeff = out_scale * br.focal_weights[r];
    br.out_term -= coeff * log_p;
    if (want_gradient && coeff != 0.0) {
      for (std::size_t j = 0; j < n_out; ++j) {
        factor[j] = std::exp(m.out_logits[j] - m.log_all) -
                    std::exp(m.out_logits[j] - m.log_out);
      }
      accumulate(batch_all.row(r), coeff, factor);
    }
  }

  br.total = br.in_term + br.out_term;
  return result;
}

}  // namespace

void DetectorModel::validate() const {
  if (task.size() == 0) fail(ErrorKind::kValidation, "model has no task embeddings");
  if (trainable.rows() == 0) fail(ErrorKind::kValidation, "model has no trainable embeddings");
  if (task.names.size() != task.size()) {
    fail(ErrorKind::kValidation, "task name count does not match task embeddings");
  }
  if (trainable.cols() != task.dim()) {
    fail(ErrorKind::kValidation, "trainable dim " + std::to_string(trainable.cols()) +
                                     " != task dim " + std::to_string(task.dim()));
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    fail(ErrorKind::kValidation, "temperature must be positive");
  }
  for (std::size_t i = 0; i < task.size(); ++i) {
    if (std::abs(l2_norm(task.embeddings.row(i)) - 1.0) > kUnitNormTolerance) {
      fail(ErrorKind::kValidation, "task embedding " + std::to_string(i) + " is not unit norm");
    }
  }
}

const char* to_string(LossVariant v) noexcept {
  return v == LossVariant::kProposed ? "proposed" : "original";
}

LossVariant parse_loss_variant(const std::string& name) {
  if (name == "proposed" || name == "proposed_eq4") return LossVariant::kProposed;
  if (name == "original" || name == "original_eq2") return LossVariant::kOriginal;
  fail(ErrorKind::kValidation, "unknown loss variant '" + name + "'");
}

void LossConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail(ErrorKind::kValidation, "lambda must lie in [0,1]");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    fail(ErrorKind::kValidation, "gamma must be a finite value >= 0");
  }
}

LogMasses log_masses(const DetectorModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) {
    fail(ErrorKind::kValidation, "embedding dim " + std::to_string(x.size()) +
                                     " != model dim " + std::to_string(model.dim()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) fail(ErrorKind::kValidation, "embedding contains NaN/Inf");
  }
  const double inv_tau = 1.0 / model.temperature;
  std::vector<double> in_logits(model.task.size());
  for (std::size_t i = 0; i < in_logits.size(); ++i) {
    in_logits[i] = dot(x, model.task.embeddings.row(i)) * inv_tau;
  }
  LogMasses m;
  m.out_logits.resize(model.trainable.rows());
  for (std::size_t j = 0; j < m.out_logits.size(); ++j) {
    m.out_logits[j] = dot(x, model.trainable.row(j)) * inv_tau;
  }
  m.log_in = log_sum_exp(in_logits);
  m.log_out = log_sum_exp(m.out_logits);
  const double hi = std::max(m.log_in, m.log_out);
  const double lo = std::min(m.log_in, m.log_out);
  m.log_all = hi + std::log1p(std::exp(lo - hi));
  return m;
}

double predict_out_probability(const DetectorModel& model, std::span<const double> x) {
  const LogMasses m = log_masses(model, x);
  // 1 / (1 + exp(log_in - log_out)) loses nothing until it saturates.
  const double p = 1.0 / (1.0 + std::exp(m.log_in - m.log_out));
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

std::vector<double> focal_weights(std::span<const double> probs, double gamma) {
  if (probs.empty()) fail(ErrorKind::kValidation, "focal weights need a non-empty batch");
  if (!(gamma >= 0.0)) fail(ErrorKind::kValidation, "gamma must be >= 0");
  const std::size_t n = probs.size();
  if (gamma == 0.0) return std::vector<double>(n, 1.0);

  std::vector<double> alpha(n);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(probs[j] >= 0.0 && probs[j] <= 1.0)) {
      fail(ErrorKind::kValidation, "probability outside [0,1] at index " + std::to_string(j));
    }
    alpha[j] = std::pow(1.0 - probs[j], gamma);
    sum += alpha[j];
  }
  if (!(sum > 0.0)) {
    fail(ErrorKind::kDegenerate, "every focal weight is zero (all p = 1)");
  }
  const double scale = static_cast<double>(n) / sum;
  for (double& a : alpha) a *= scale;
  return alpha;
}

LossBreakdown loss(const DetectorModel& model, const Matrix& batch_in,
                   const Matrix& batch_all, const LossConfig& cfg) {
  return evaluate(model, batch_in, batch_all, cfg, {}, false).loss;
}

LossBreakdown loss_with_weights(const DetectorModel& model, const Matrix& batch_in,
                                const Matrix& batch_all, const LossConfig& cfg,
                                std::span<const double> weights) {
  if (weights.empty()) fail(ErrorKind::kValidation, "fixed focal weights are empty");
  return evaluate(model, batch_in, batch_all, cfg, weights, false).loss;
}

Matrix loss_gradient(const DetectorModel& model, const Matrix& batch_in,
                     const Matrix& batch_all, const LossConfig& cfg) {
  return evaluate(model, batch_in, batch_all, cfg, {}, true).gradient;
}

LossAndGradient loss_and_gradient(const DetectorModel& model, const Matrix& batch_in,
                                  const Matrix& batch_all, const LossConfig& cfg) {
  return evaluate(model, batch_in, batch_all, cfg, {}, true);
}

}  // namespace hftt
