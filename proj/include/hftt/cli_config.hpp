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

// Flat "key = value" training configuration with '#' comments.

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "hftt/trainer.hpp"

namespace hftt {

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text, const std::string& origin = "<config>");
KeyValues read_key_values(const std::filesystem::path& path);

/// Applies every entry to `cfg`. Unknown keys and malformed values are
/// validation errors.
void apply_key_values(TrainConfig& cfg, const KeyValues& values);

/// Keys accepted by apply_key_values, in documentation order.
const std::vector<std::string>& train_config_keys();

}  // namespace hftt
