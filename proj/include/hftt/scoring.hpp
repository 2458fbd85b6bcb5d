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

#include <filesystem>
#include <string>
#include <vector>

#include "hftt/embedding_store.hpp"
#include "hftt/objective.hpp"

namespace hftt {

/// kUnknown marks score files read back from CSV, which do not record the method.
enum class ScoreMethod { kHftt, kMsp, kMaxLogit, kEnergy, kMcm, kUnknown };

const char* to_string(ScoreMethod m) noexcept;
ScoreMethod parse_score_method(const std::string& name);

inline constexpr const char* kScoreConvention = "higher=more-out-distribution";

struct ScoreSet {
  ScoreMethod method = ScoreMethod::kUnknown;
  std::vector<double> scores;
  std::vector<std::string> ids;
  std::string convention = kScoreConvention;

  std::size_t size() const noexcept { return scores.size(); }
  void validate() const;
};

/// score_i = p(x_i).
ScoreSet score_hftt(const DetectorModel& model, const EmbeddingStore& inputs);

/// Training-free baselines on cosine logits s_i = x.w_in_i / temperature:
///   msp       1 - max softmax(s)
///   maxlogit  -max s
///   energy    -logsumexp(s)
///   mcm       1 - max softmax(s); callers pass MCM's own temperature
/// msp and mcm need K >= 2.
ScoreSet score_baseline(ScoreMethod method, const TaskEmbeddings& task,
                        const EmbeddingStore& inputs, double temperature);

/// CSV "id,score", scores printed with 17 significant digits.
void export_scores(const ScoreSet& set, const std::filesystem::path& path);
ScoreSet import_scores(const std::filesystem::path& path);

}  // namespace hftt
