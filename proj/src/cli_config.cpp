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

#include "hftt/cli_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hftt/error.hpp"

namespace hftt {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    fail(ErrorKind::kValidation, "bad value for " + key + ": '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  fail(ErrorKind::kValidation, "bad boolean for " + key + ": '" + value + "'");
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::kValidation, origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(ErrorKind::kValidation, origin + ":" + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str(), path.string());
}

const std::vector<std::string>& train_config_keys() {
  static const std::vector<std::string> keys = {
      "batch_size", "learning_rate", "epochs", "n_trainable", "lambda",   "gamma",
      "seed",       "renormalize",   "loss_variant", "init",   "sampling", "reduction", "temperature"};
  return keys;
}

void apply_key_values(TrainConfig& cfg, const KeyValues& values) {
  for (const auto& [key, value] : values) {
    if (key == "batch_size") {
      cfg.batch_size = parse_number<std::size_t>(key, value);
    } else if (key == "learning_rate" || key == "lr") {
      cfg.learning_rate = parse_number<double>(key, value);
    } else if (key == "epochs") {
      cfg.epochs = parse_number<std::size_t>(key, value);
    } else if (key == "n_trainable" || key == "N") {
      cfg.n_trainable = parse_number<std::size_t>(key, value);
    } else if (key == "lambda") {
      cfg.lambda = parse_number<double>(key, value);
    } else if (key == "gamma") {
      cfg.gamma = parse_number<double>(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "renormalize") {
      cfg.renormalize = parse_bool(key, value);
    } else if (key == "loss_variant") {
      cfg.loss_variant = parse_loss_variant(value);
    } else if (key == "init") {
      cfg.init = parse_init_kind(value);
    } else if (key == "sampling") {
      cfg.sampling = parse_corpus_sampling(value);
    } else if (key == "reduction") {
      cfg.reduction = parse_reduction(value);
    } else if (key == "temperature") {
      cfg.temperature = parse_number<double>(key, value);
    } else {
      fail(ErrorKind::kValidation, "unknown config key '" + key + "'");
    }
  }
}

}  // namespace hftt
