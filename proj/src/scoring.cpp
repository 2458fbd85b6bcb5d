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

#include "hftt/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hftt/error.hpp"

namespace hftt {
namespace {

void check_dims(std::size_t expected, const EmbeddingStore& inputs) {
  if (inputs.count() > 0 && inputs.dim() != expected) {
    fail(ErrorKind::kValidation, "input dim " + std::to_string(inputs.dim()) +
                                     " != model dim " + std::to_string(expected));
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Splits one CSV record of exactly two fields. RFC 4180 quoting.
bool split_record(const std::string& line, std::string& id, std::string& value) {
  id.clear();
  std::size_t i = 0;
  if (!line.empty() && line[0] == '"') {
    for (i = 1; i < line.size(); ++i) {
      if (line[i] == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          id += '"';
          ++i;
        } else {
          ++i;
          break;
        }
      } else {
        id += line[i];
      }
    }
    if (i >= line.size() || line[i] != ',') return false;
  } else {
    i = line.find(',');
    if (i == std::string::npos) return false;
    id = line.substr(0, i);
  }
  value = line.substr(i + 1);
  return value.find(',') == std::string::npos;
}

}  // namespace

const char* to_string(ScoreMethod m) noexcept {
  switch (m) {
    case ScoreMethod::kHftt:
      return "hftt";
    case ScoreMethod::kMsp:
      return "msp";
    case ScoreMethod::kMaxLogit:
      return "maxlogit";
    case ScoreMethod::kEnergy:
      return "energy";
    case ScoreMethod::kMcm:
      return "mcm";
    case ScoreMethod::kUnknown:
      return "unknown";
  }
  return "unknown";
}

ScoreMethod parse_score_method(const std::string& name) {
  for (auto m : {ScoreMethod::kHftt, ScoreMethod::kMsp, ScoreMethod::kMaxLogit,
                 ScoreMethod::kEnergy, ScoreMethod::kMcm}) {
    if (name == to_string(m)) return m;
  }
  fail(ErrorKind::kValidation, "unknown score method '" + name + "'");
}

void ScoreSet::validate() const {
  if (scores.size() != ids.size()) fail(ErrorKind::kValidation, "score/id length mismatch");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      fail(ErrorKind::kNumerical, "non-finite score for id '" + ids[i] + "'");
    }
  }
}

ScoreSet score_hftt(const DetectorModel& model, const EmbeddingStore& inputs) {
  model.validate();
  check_dims(model.dim(), inputs);
  ScoreSet set;
  set.method = ScoreMethod::kHftt;
  set.scores.reserve(inputs.count());
  for (std::size_t i = 0; i < inputs.count(); ++i) {
    set.scores.push_back(predict_out_probability(model, inputs.row(i)));
    set.ids.push_back(inputs.id(i));
  }
  return set;
}

ScoreSet score_baseline(ScoreMethod method, const TaskEmbeddings& task,
                        const EmbeddingStore& inputs, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    fail(ErrorKind::kValidation, "temperature must be positive");
  }
  const std::size_t k = task.size();
  switch (method) {
    case ScoreMethod::kMsp:
    case ScoreMethod::kMcm:
      if (k < 2) fail(ErrorKind::kValidation, std::string(to_string(method)) + " needs K >= 2");
      break;
    case ScoreMethod::kMaxLogit:
    case ScoreMethod::kEnergy:
      if (k < 1) fail(ErrorKind::kValidation, "baseline needs K >= 1");
      break;
    default:
      fail(ErrorKind::kValidation, std::string(to_string(method)) + " is not a baseline");
  }
  check_dims(task.dim(), inputs);

  ScoreSet set;
  set.method = method;
  set.scores.reserve(inputs.count());
  std::vector<double> logits(k);
  for (std::size_t r = 0; r < inputs.count(); ++r) {
    const auto x = inputs.row(r);
    for (std::size_t i = 0; i < k; ++i) logits[i] = dot(x, task.embeddings.row(i)) / temperature;
    const double peak = *std::max_element(logits.begin(), logits.end());
    double mass = 0.0;
    for (double s : logits) mass += std::exp(s - peak);
    double score = 0.0;
    switch (method) {
      case ScoreMethod::kMsp:
      case ScoreMethod::kMcm:
        score = 1.0 - 1.0 / mass;  // max softmax = exp(peak - peak) / mass
        break;
      case ScoreMethod::kMaxLogit:
        score = -peak;
        break;
      case ScoreMethod::kEnergy:
        score = -(peak + std::log(mass));
        break;
      default:
        break;
    }
    set.scores.push_back(score);
    set.ids.push_back(inputs.id(r));
  }
  return set;
}

void export_scores(const ScoreSet& set, const std::filesystem::path& path) {
  set.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out << "id,score\n";
  char buf[64];
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", set.scores[i]);
    out << csv_field(set.ids[i]) << ',' << buf << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "write failed: " + path.string());
}

ScoreSet import_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kFormat, path.string() + ": empty score file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,score") fail(ErrorKind::kFormat, path.string() + ": header must be id,score");

  ScoreSet set;
  std::string id;
  std::string value;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!split_record(line, id, value)) {
      fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(lineno) + ": bad record");
    }
    double score = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), score);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(lineno) +
                                   ": bad score '" + value + "'");
    }
    set.ids.push_back(id);
    set.scores.push_back(score);
  }
  set.validate();
  return set;
}

}  // namespace hftt
