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

// Detection metrics. The positive class is the out-distribution: a higher
// score means "more likely unwanted", TPR is the fraction of out-distribution
// samples caught, FPR the fraction of in-distribution samples flagged.

#pragma once

#include <span>
#include <string>
#include <utility>

#include "json.hpp"
#include "hftt/scoring.hpp"

namespace hftt {

/// P(s_out > s_in) + 0.5 P(s_out = s_in), via midranks in O(n log n).
double auroc(std::span<const double> id_scores, std::span<const double> ood_scores);

struct FprAtTpr {
  double fpr = 0.0;
  double threshold = 0.0;
};

/// threshold: the largest observed out-distribution score t with
/// |{ood >= t}| / |ood| >= tpr. fpr = |{id >= t}| / |id|.
FprAtTpr fpr_at_tpr(std::span<const double> id_scores, std::span<const double> ood_scores,
                    double tpr = 0.95);

struct EvalReport {
  double auroc = 0.0;
  double fpr_at_95_tpr = 0.0;
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  double threshold = 0.0;
  std::string method;
  std::pair<std::string, std::string> pair;
  std::string positive_class = "out-distribution";
};

/// Fails when the two sets disagree on score convention or on method (a set
/// read back from CSV has an unknown method and matches anything).
EvalReport eval_report(const ScoreSet& id, const ScoreSet& ood, std::string id_name = "in",
                       std::string ood_name = "out");

void to_json(nlohmann::json& j, const EvalReport& r);

/// Table row with FPR95 and AUROC in percent, two decimals.
std::string render_table_row(const EvalReport& r);
std::string render_table_header();

}  // namespace hftt
