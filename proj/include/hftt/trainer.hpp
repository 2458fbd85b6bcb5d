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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "hftt/embedding_store.hpp"
#include "hftt/objective.hpp"

namespace hftt {

enum class InitKind { kRandomUnit, kCorpusMeanPerturbed };
enum class CorpusSampling { kShuffle, kIid };
/// Scale of the SGD step: kMean divides the summed batch gradient by the
/// batch size, kSum applies it as is.
enum class Reduction { kMean, kSum };

const char* to_string(InitKind k) noexcept;
const char* to_string(CorpusSampling s) noexcept;
const char* to_string(Reduction r) noexcept;
InitKind parse_init_kind(const std::string& name);
CorpusSampling parse_corpus_sampling(const std::string& name);
Reduction parse_reduction(const std::string& name);

/// Defaults follow the reference training recipe: batch 256, lr 1.0,
/// one epoch, gamma 1, lambda 0, N = 10.
struct TrainConfig {
  std::size_t batch_size = 256;
  double learning_rate = 1.0;
  std::size_t epochs = 1;
  std::size_t n_trainable = 10;
  double lambda = 0.0;
  double gamma = 1.0;
  std::uint64_t seed = 42;
  bool renormalize = true;
  LossVariant loss_variant = LossVariant::kProposed;
  InitKind init = InitKind::kRandomUnit;
  CorpusSampling sampling = CorpusSampling::kShuffle;
  Reduction reduction = Reduction::kMean;
  /// Overrides the temperature recorded in the corpus store.
  std::optional<double> temperature;

  LossConfig loss_config() const { return {lambda, gamma, loss_variant}; }
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);

struct TrainReport {
  std::size_t steps = 0;
  /// Per-step loss, divided by the batch size under Reduction::kMean.
  std::vector<double> loss_trace;
  std::size_t clamp_events = 0;
  Matrix initial_trainable;
  DetectorModel final_model;
  std::vector<std::string> warnings;
};

/// ceil(corpus_count / batch_size) * epochs.
std::size_t planned_steps(std::size_t corpus_count, const TrainConfig& cfg);

/// Draws n unit vectors. random_unit: normalized isotropic Gaussians.
/// corpus_mean_perturbed: mean of up to 1,000 sampled corpus rows plus
/// N(0, 0.1^2) noise per coordinate, normalized; needs `corpus`.
Matrix init_trainable(std::size_t n, std::size_t dim, std::mt19937_64& rng, InitKind kind,
                      const EmbeddingStore* corpus = nullptr);
Matrix init_trainable(std::size_t n, std::size_t dim, std::uint64_t seed, InitKind kind,
                      const EmbeddingStore* corpus = nullptr);

/// Called after every update with the 0-based step index and current model.
using StepObserver = std::function<void(std::size_t, const DetectorModel&)>;

/// Mini-batch SGD over the trainable embeddings only. Each step pairs one
/// corpus batch with an equally sized in-distribution batch sampled with
/// replacement. The last short batch of an epoch is kept.
TrainReport train(const TrainConfig& cfg, const TaskEmbeddings& task,
                  const EmbeddingStore& in_texts, const EmbeddingStore& corpus,
                  const StepObserver& observer = {});

/// Model directory: manifest.json, task.hemb (+ task.labels.txt), trainable.hemb.
void save_model(const DetectorModel& model, const std::filesystem::path& dir,
                const TrainConfig* config = nullptr);
DetectorModel load_model(const std::filesystem::path& dir);

}  // namespace hftt
