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

// Out-distribution probability, the focal-weighted training loss, and its
// gradient with respect to the trainable embeddings.
//
//   p(x) = sum_j exp(x.w_out_j / tau) /
//          (sum_i exp(x.w_in_i / tau) + sum_j exp(x.w_out_j / tau))
//
// Proposed loss over an in-distribution batch B_in and a batch B drawn from
// the whole data distribution:
//
//   sum_{x in B_in} -log(1 - p(x)) + (1 - lambda) sum_{x in B} beta_x (-log p(x))
//   alpha_x = (1 - p(x))^gamma,  beta_x = |B| alpha_x / sum_B alpha
//
// The original variant subtracts the in-distribution term instead:
//
//   lambda sum_{B_in} -log(1 - p) + (1 - lambda) sum_{B} -log p
//
// where B must then be disjoint out-distribution data.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hftt/embedding_store.hpp"
#include "hftt/matrix.hpp"

namespace hftt {

/// The whole learned state: frozen task embeddings plus N trainable ones.
struct DetectorModel {
  TaskEmbeddings task;  // K x dim
  Matrix trainable;     // N x dim
  double temperature = kDefaultTemperature;

  std::size_t dim() const noexcept { return task.dim(); }

  /// Throws if dimensions disagree, τ is not positive, or task rows are not
  /// unit vectors.
  void validate() const;

  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;
};

enum class LossVariant { kProposed, kOriginal };

const char* to_string(LossVariant v) noexcept;
LossVariant parse_loss_variant(const std::string& name);

struct LossConfig {
  double lambda = 0.0;
  double gamma = 1.0;
  LossVariant variant = LossVariant::kProposed;

  void validate() const;
};

inline constexpr double kProbabilityClamp = 1e-12;

struct LossBreakdown {
  double total = 0.0;
  double in_term = 0.0;
  double out_term = 0.0;
  std::vector<double> in_p;          // p(x) over the in-distribution batch
  std::vector<double> per_sample_p;  // p(x) over the all-data batch
  std::vector<double> focal_weights; // beta over the all-data batch
  std::size_t clamp_events = 0;      // logs evaluated at the ε clamp
};

/// Softmax masses of one embedding against a model, in log space.
struct LogMasses {
  double log_in = 0.0;   // log sum_i exp(s_in_i)
  double log_out = 0.0;  // log sum_j exp(s_out_j)
  double log_all = 0.0;
  std::vector<double> out_logits;  // s_out_j = x.w_out_j / tau
};

LogMasses log_masses(const DetectorModel& model, std::span<const double> x);

/// p(x), kept inside the open interval (0, 1) even when one side's mass
/// underflows.
double predict_out_probability(const DetectorModel& model, std::span<const double> x);

/// beta_j = n alpha_j / sum alpha with alpha_j = (1 - p_j)^gamma.
std::vector<double> focal_weights(std::span<const double> probs, double gamma);

LossBreakdown loss(const DetectorModel& model, const Matrix& batch_in,
                   const Matrix& batch_all, const LossConfig& cfg);

/// Same as loss() but with the focal weights supplied by the caller and
/// held fixed. Used to probe the stop-gradient objective.
LossBreakdown loss_with_weights(const DetectorModel& model, const Matrix& batch_in,
                                const Matrix& batch_all, const LossConfig& cfg,
                                std::span<const double> weights);

/// d(total)/d(w_out), N x dim. Focal weights are treated as constants.
Matrix loss_gradient(const DetectorModel& model, const Matrix& batch_in,
                     const Matrix& batch_all, const LossConfig& cfg);

/// Gradient and loss from a single pass over the batches.
struct LossAndGradient {
  LossBreakdown loss;
  Matrix gradient;
};

LossAndGradient loss_and_gradient(const DetectorModel& model, const Matrix& batch_in,
                                  const Matrix& batch_all, const LossConfig& cfg);

}  // namespace hftt
