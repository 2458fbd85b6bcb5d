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

// Synthetic two-mode data on the unit sphere. Two classes (y = -1, +1) are
// observed through two modalities, U ("text") and V ("image"), with class
// means u_y, v_y. A cosine classifier fitted on U alone should separate V
// whenever the means are aligned across modalities:
//
//   u+.v+ > u+.v-   and   u-.v+ < u-.v-
//
// The quadratic-loss optimum over unit theta is (u+ - u-) / |u+ - u-|.

#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "json.hpp"
#include "hftt/embedding_store.hpp"

namespace hftt {

using Vector = std::vector<double>;

struct BimodalConfig {
  std::size_t dim = 64;
  std::size_t samples_per_class = 10000;
  Vector mean_u_minus;
  Vector mean_u_plus;
  Vector mean_v_minus;
  Vector mean_v_plus;
  double noise_scale = 0.3;
  std::uint64_t seed = 42;

  /// (u+.v+ - u+.v-, u-.v- - u-.v+); both positive for a valid config.
  std::pair<double, double> alignment_margins() const;
  void validate() const;
};

/// Axis-aligned fixture: u- = e0, u+ = e1, v_y = 0.8 u_y + 0.6 e2 (a shared
/// modality offset). Both margins are 0.8. Needs dim >= 3.
BimodalConfig default_bimodal_config(std::size_t dim = 64, std::size_t samples = 10000,
                                     double noise = 0.3, std::uint64_t seed = 42);

/// Random means whose margins are both at least `min_margin`: random unit
/// class means and a random modality offset mixed in at a random ratio.
BimodalConfig random_bimodal_config(std::size_t dim, std::size_t samples, double noise,
                                    double min_margin, std::mt19937_64& rng);

struct BimodalSample {
  EmbeddingStore u_minus;  // text
  EmbeddingStore u_plus;   // text
  EmbeddingStore v_minus;  // image
  EmbeddingStore v_plus;   // image
};

/// Each point is normalize(mean + noise * N(0, I)); one generator per call,
/// sets drawn in the order U-, U+, V-, V+.
BimodalSample sample_bimodal(const BimodalConfig& cfg);

Vector empirical_mean(const EmbeddingStore& store);

Vector closed_form_classifier(const Vector& u_minus, const Vector& u_plus);

struct FitOptions {
  std::size_t max_steps = 5000;
  double learning_rate = 0.5;
  std::uint64_t seed = 7;
  /// Stop once the gradient's tangential component is this small.
  double tolerance = 1e-12;
  /// Give up after this many consecutive steps without a lower loss.
  std::size_t patience = 100;
};

struct FitResult {
  Vector theta;
  std::vector<double> loss_trace;
  std::size_t steps = 0;
  bool converged = false;
};

/// Projected gradient descent on the sphere for
///   mean_{U-} (1 + theta.u)^2 + mean_{U+} (1 - theta.u)^2.
/// Starts from a seeded random unit vector. Non-convergence is reported in
/// the result, not thrown.
FitResult fit_quadratic_classifier(const EmbeddingStore& u_minus, const EmbeddingStore& u_plus,
                                   const FitOptions& opts = {});

struct CorollaryReport {
  double mean_minus = 0.0;
  double mean_plus = 0.0;
  bool holds = false;
};

/// holds = mean_{V-} theta.v < 0 < mean_{V+} theta.v
CorollaryReport verify_corollary(const Vector& theta, const EmbeddingStore& v_minus,
                                 const EmbeddingStore& v_plus);

/// Fraction of V points with sign(theta.v) equal to their class label.
double sign_accuracy(const Vector& theta, const EmbeddingStore& v_minus,
                     const EmbeddingStore& v_plus);

double cosine(const Vector& a, const Vector& b);

struct TheoryReport {
  Vector theta_closed;
  Vector theta_fitted;
  double cosine = 0.0;
  CorollaryReport corollary;
  double accuracy = 0.0;
  std::pair<double, double> margins;
  bool fit_converged = false;
  std::size_t fit_steps = 0;
};

/// Fits on the U sets and checks the transfer to the V sets.
TheoryReport run_theory(const BimodalConfig& cfg, const BimodalSample& sample,
                        const FitOptions& opts = {});

void to_json(nlohmann::json& j, const TheoryReport& r);

}  // namespace hftt
