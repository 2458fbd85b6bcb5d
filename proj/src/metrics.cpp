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

#include "hftt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <vector>

#include "hftt/error.hpp"

namespace hftt {
namespace {

void require_nonempty(std::span<const double> id, std::span<const double> ood) {
  if (id.empty() || ood.empty()) {
    fail(ErrorKind::kValidation, "metrics need non-empty in- and out-distribution scores");
  }
}

}  // namespace

double auroc(std::span<const double> id_scores, std::span<const double> ood_scores) {
  require_nonempty(id_scores, ood_scores);
  struct Entry {
    double score;
    bool ood;
  };
  std::vector<Entry> all;
  all.reserve(id_scores.size() + ood_scores.size());
  for (double s : id_scores) all.push_back({s, false});
  for (double s : ood_scores) all.push_back({s, true});
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.score < b.score; });

  // Twice the rank sum of the ood samples, with midranks for ties; integral.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    std::uint64_t tied_ood = 0;
    while (j < all.size() && all[j].score == all[i].score) {
      tied_ood += all[j].ood;
      ++j;
    }
    // 1-based ranks i+1..j; twice the midrank is i+1+j.
    twice_rank_sum += tied_ood * (i + 1 + j);
    i = j;
  }
  const std::uint64_t n_out = ood_scores.size();
  const std::uint64_t n_in = id_scores.size();
  // 2U = 2R - n_out (n_out + 1): twice the count of ordered pairs plus ties.
  const std::uint64_t twice_u = twice_rank_sum - n_out * (n_out + 1);
  return static_cast<double>(twice_u) / 2.0 /
         (static_cast<double>(n_in) * static_cast<double>(n_out));
}

FprAtTpr fpr_at_tpr(std::span<const double> id_scores, std::span<const double> ood_scores,
                    double tpr) {
  require_nonempty(id_scores, ood_scores);
  if (!(tpr > 0.0 && tpr <= 1.0)) fail(ErrorKind::kValidation, "tpr must lie in (0,1]");

  std::vector<double> ood(ood_scores.begin(), ood_scores.end());
  std::sort(ood.begin(), ood.end(), std::greater<>());
  const std::size_t n = ood.size();
  const auto frac = [n](std::size_t k) { return static_cast<double>(k) / static_cast<double>(n); };

  // Smallest k with k / n >= tpr; the k-th largest score is the threshold.
  auto k = static_cast<std::size_t>(std::ceil(tpr * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  while (k > 1 && frac(k - 1) >= tpr) --k;
  while (k < n && frac(k) < tpr) ++k;

  FprAtTpr out;
  out.threshold = ood[k - 1];
  const auto flagged = std::count_if(id_scores.begin(), id_scores.end(),
                                     [&](double s) { return s >= out.threshold; });
  out.fpr = static_cast<double>(flagged) / static_cast<double>(id_scores.size());
  return out;
}

EvalReport eval_report(const ScoreSet& id, const ScoreSet& ood, std::string id_name,
                       std::string ood_name) {
  id.validate();
  ood.validate();
  if (id.convention != ood.convention) {
    fail(ErrorKind::kValidation, "score sets use different conventions: '" + id.convention +
                                     "' vs '" + ood.convention + "'");
  }
  if (id.method != ood.method && id.method != ScoreMethod::kUnknown &&
      ood.method != ScoreMethod::kUnknown) {
    fail(ErrorKind::kValidation, std::string("score sets come from different methods: ") +
                                     to_string(id.method) + " vs " + to_string(ood.method));
  }
  EvalReport r;
  r.auroc = auroc(id.scores, ood.scores);
  const auto f = fpr_at_tpr(id.scores, ood.scores, 0.95);
  r.fpr_at_95_tpr = f.fpr;
  r.threshold = f.threshold;
  r.n_in = id.size();
  r.n_out = ood.size();
  r.method = to_string(id.method != ScoreMethod::kUnknown ? id.method : ood.method);
  r.pair = {std::move(id_name), std::move(ood_name)};
  return r;
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = nlohmann::json{
      {"auroc", r.auroc},
      {"fpr_at_95_tpr", r.fpr_at_95_tpr},
      {"threshold", r.threshold},
      {"n_in", r.n_in},
      {"n_out", r.n_out},
      {"method", r.method},
      {"in_set", r.pair.first},
      {"out_set", r.pair.second},
      {"positive_class", r.positive_class},
      {"convention", kScoreConvention},
  };
}

std::string render_table_header() {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-10s %-16s %-16s %8s %8s", "method", "in", "out",
                "FPR95", "AUROC");
  return buf;
}

std::string render_table_row(const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-10s %-16s %-16s %8.2f %8.2f", r.method.c_str(),
                r.pair.first.c_str(), r.pair.second.c_str(), 100.0 * r.fpr_at_95_tpr,
                100.0 * r.auroc);
  return buf;
}

}  // namespace hftt
